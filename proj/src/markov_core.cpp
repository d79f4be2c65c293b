#include "clrmr/markov_core.hpp"

#include "clrmr/action_space.hpp"
#include "clrmr/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

namespace clrmr {

namespace {

constexpr double kSumTol = 1e-12;
constexpr double kResidualTol = 1e-10;

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Matrix to_eigen(const TransitionMatrix& p) {
    return Eigen::Map<const Matrix>(p.data.data(), static_cast<Eigen::Index>(p.n),
                                    static_cast<Eigen::Index>(p.n));
}

// BFS over the positive-probability graph (or its reverse) from state 0.
std::vector<int> bfs_levels(const TransitionMatrix& p, bool reverse) {
    std::vector<int> level(p.n, -1);
    std::queue<std::size_t> frontier;
    level[0] = 0;
    frontier.push(0);
    while (!frontier.empty()) {
        const std::size_t x = frontier.front();
        frontier.pop();
        for (std::size_t y = 0; y < p.n; ++y) {
            const double w = reverse ? p(y, x) : p(x, y);
            if (w > 0.0 && level[y] < 0) {
                level[y] = level[x] + 1;
                frontier.push(y);
            }
        }
    }
    return level;
}

bool strongly_connected(const TransitionMatrix& p) {
    const auto fwd = bfs_levels(p, false);
    const auto bwd = bfs_levels(p, true);
    return std::ranges::none_of(fwd, [](int l) { return l < 0; }) &&
           std::ranges::none_of(bwd, [](int l) { return l < 0; });
}

// Period of an irreducible chain: gcd over edges (x,y) of level(x) + 1 - level(y).
int period(const TransitionMatrix& p) {
    const auto level = bfs_levels(p, false);
    int g = 0;
    for (std::size_t x = 0; x < p.n; ++x) {
        for (std::size_t y = 0; y < p.n; ++y) {
            if (p(x, y) > 0.0) g = std::gcd(g, std::abs(level[x] + 1 - level[y]));
        }
    }
    return g;
}

} // namespace

ChainSpec two_state_chain(double p01, double p10, double reward0, double reward1,
                          std::string label) {
    ChainSpec spec;
    spec.transition = TransitionMatrix(2);
    spec.transition(0, 0) = 1.0 - p01;
    spec.transition(0, 1) = p01;
    spec.transition(1, 0) = p10;
    spec.transition(1, 1) = 1.0 - p10;
    spec.rewards = {reward0, reward1};
    spec.label = std::move(label);
    return spec;
}

std::string ValidationResult::message() const {
    std::ostringstream os;
    for (std::size_t k = 0; k < violations.size(); ++k) {
        if (k) os << ", ";
        os << violations[k];
    }
    return os.str();
}

ValidationResult validate_chain(const ChainSpec& spec) {
    ValidationResult result;
    const auto& p = spec.transition;
    if (p.n == 0 || p.data.size() != p.n * p.n) {
        result.violations.emplace_back("dimension");
        return result;
    }
    if (spec.rewards.size() != p.n) result.violations.emplace_back("rewards_size");
    for (double r : spec.rewards) {
        if (!std::isfinite(r)) {
            result.violations.emplace_back("rewards_finite");
            break;
        }
    }

    bool in_range = true;
    bool stochastic = true;
    for (std::size_t x = 0; x < p.n; ++x) {
        double sum = 0.0;
        for (double v : p.row(x)) {
            if (!(v >= 0.0 && v <= 1.0)) in_range = false;
            sum += v;
        }
        if (!(std::abs(sum - 1.0) <= kSumTol)) stochastic = false;
    }
    if (!in_range) result.violations.emplace_back("entries_in_range");
    if (!stochastic) result.violations.emplace_back("row_stochastic");

    if (in_range) {
        if (!strongly_connected(p)) {
            result.violations.emplace_back("irreducible");
        } else if (period(p) != 1) {
            result.violations.emplace_back("aperiodic");
        }
    }

    if (!spec.initial_dist.empty()) {
        bool ok = spec.initial_dist.size() == p.n;
        double sum = 0.0;
        for (double q : spec.initial_dist) {
            if (!(q >= 0.0 && q <= 1.0)) ok = false;
            sum += q;
        }
        if (!ok || !(std::abs(sum - 1.0) <= kSumTol)) {
            result.violations.emplace_back("initial_distribution");
        }
    }
    return result;
}

void require_valid(const ChainSpec& spec) {
    const auto result = validate_chain(spec);
    if (!result.ok()) {
        throw ValidationError("chain '" + spec.label + "' invalid: " + result.message());
    }
}

std::vector<double> stationary_distribution(const ChainSpec& spec) {
    const auto n = static_cast<Eigen::Index>(spec.num_states());
    const Matrix p = to_eigen(spec.transition);
    // (P^T - I) pi = 0 with the last equation replaced by 1^T pi = 1.
    Matrix a = p.transpose() - Matrix::Identity(n, n);
    a.row(n - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(n - 1) = 1.0;

    Eigen::FullPivLU<Matrix> lu(a);
    lu.setThreshold(1e-13);
    if (!lu.isInvertible()) {
        throw NumericalError("stationary solve singular for chain '" + spec.label + "'");
    }
    const Eigen::VectorXd pi = lu.solve(rhs);

    std::vector<double> out(pi.data(), pi.data() + n);
    double residual = 0.0;
    const Eigen::VectorXd r = p.transpose() * pi - pi;
    residual = r.cwiseAbs().maxCoeff();
    if (!(residual <= kResidualTol) ||
        std::ranges::any_of(out, [](double v) { return !(v > 0.0); })) {
        throw NumericalError("stationary solve ill-conditioned for chain '" + spec.label + "'");
    }
    return out;
}

TransitionMatrix multiplicative_symmetrization(const TransitionMatrix& p,
                                               std::span<const double> pi) {
    const std::size_t n = p.n;
    TransitionMatrix adjoint(n);
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t y = 0; y < n; ++y) adjoint(x, y) = p(y, x) * pi[y] / pi[x];
    }
    TransitionMatrix out(n);
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t k = 0; k < n; ++k) {
            const double a = adjoint(x, k);
            if (a == 0.0) continue;
            for (std::size_t y = 0; y < n; ++y) out(x, y) += a * p(k, y);
        }
    }
    return out;
}

ChainAnalysis analyze_chain(const ChainSpec& spec) {
    ChainAnalysis out;
    out.stationary = stationary_distribution(spec);
    const std::size_t n = spec.num_states();
    for (std::size_t x = 0; x < n; ++x) {
        out.mean_reward += spec.rewards[x] * out.stationary[x];
        out.pi_hat.push_back(std::max(out.stationary[x], 1.0 - out.stationary[x]));
    }

    // D^{1/2} P_hat D^{-1/2} = A^T A with A = D^{1/2} P D^{-1/2}, which is symmetric.
    const auto en = static_cast<Eigen::Index>(n);
    Matrix a(en, en);
    for (Eigen::Index x = 0; x < en; ++x) {
        for (Eigen::Index y = 0; y < en; ++y) {
            a(x, y) = std::sqrt(out.stationary[x] / out.stationary[y]) * spec.transition(x, y);
        }
    }
    if (n == 1) {
        out.eigen_gap = 1.0;
        return out;
    }
    const Matrix sym = a.transpose() * a;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("eigensolver did not converge for chain '" + spec.label + "'");
    }
    // Eigenvalues ascending; the largest is 1.
    const double lambda2 = solver.eigenvalues()(en - 2);
    // P_hat can be reducible for a valid chain; l_threshold rejects the zero gap.
    out.eigen_gap = std::clamp(1.0 - lambda2, 0.0, 1.0);
    return out;
}

ChainSpec product_chain(std::span<const ChainSpec> specs, const Arm& arm,
                        std::size_t state_cap) {
    const auto& support = arm.support();
    std::size_t total = 1;
    for (std::size_t i : support) {
        total *= specs[i].num_states();
        if (total > state_cap) {
            throw CapExceeded("product chain of arm " + arm.id() + " exceeds " +
                              std::to_string(state_cap) + " states");
        }
    }

    // Mixed-radix digits, first support chain most significant.
    const std::size_t k = support.size();
    std::vector<std::vector<int>> digits(total, std::vector<int>(k));
    for (std::size_t z = 0; z < total; ++z) {
        std::size_t rem = z;
        for (std::size_t j = k; j-- > 0;) {
            const std::size_t radix = specs[support[j]].num_states();
            digits[z][j] = static_cast<int>(rem % radix);
            rem /= radix;
        }
    }

    ChainSpec out;
    out.transition = TransitionMatrix(total);
    out.rewards.assign(total, 0.0);
    bool any_initial = false;
    for (std::size_t i : support) any_initial = any_initial || !specs[i].initial_dist.empty();
    std::vector<std::vector<double>> initial;
    if (any_initial) {
        out.initial_dist.assign(total, 1.0);
        for (std::size_t i : support) {
            initial.push_back(specs[i].initial_dist.empty() ? stationary_distribution(specs[i])
                                                            : specs[i].initial_dist);
        }
    }

    for (std::size_t z = 0; z < total; ++z) {
        for (std::size_t j = 0; j < k; ++j) {
            const auto& c = specs[support[j]];
            out.rewards[z] += arm.coefficient(support[j]) * c.rewards[digits[z][j]];
            if (any_initial) out.initial_dist[z] *= initial[j][digits[z][j]];
        }
        for (std::size_t w = 0; w < total; ++w) {
            double prob = 1.0;
            for (std::size_t j = 0; j < k && prob != 0.0; ++j) {
                prob *= specs[support[j]].transition(digits[z][j], digits[w][j]);
            }
            out.transition(z, w) = prob;
        }
    }
    for (std::size_t j = 0; j < k; ++j) {
        if (j) out.label += "x";
        out.label += specs[support[j]].label.empty() ? std::to_string(support[j])
                                                     : specs[support[j]].label;
    }
    return out;
}

TransitionMatrix mean_hitting_times(const ChainSpec& spec) {
    const std::size_t n = spec.num_states();
    if (n > kProductStateCap) throw CapExceeded("hitting times limited to 10000 states");
    TransitionMatrix out(n);
    if (n == 1) return out;
    const auto m = static_cast<Eigen::Index>(n - 1);

    for (std::size_t target = 0; target < n; ++target) {
        // (I - Q) h = 1 over the states other than the target.
        Matrix a = Matrix::Identity(m, m);
        for (std::size_t x = 0, r = 0; x < n; ++x) {
            if (x == target) continue;
            for (std::size_t y = 0, c = 0; y < n; ++y) {
                if (y == target) continue;
                a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) -=
                    spec.transition(x, y);
                ++c;
            }
            ++r;
        }
        Eigen::PartialPivLU<Matrix> lu(a);
        const Eigen::VectorXd h = lu.solve(Eigen::VectorXd::Ones(m));
        if (!h.allFinite() || (a * h - Eigen::VectorXd::Ones(m)).cwiseAbs().maxCoeff() > 1e-8 ||
            h.minCoeff() < 1.0 - 1e-9) {
            throw NumericalError("hitting-time system singular for chain '" + spec.label + "'");
        }
        for (std::size_t x = 0, r = 0; x < n; ++x) {
            if (x == target) continue;
            out(x, target) = h(static_cast<Eigen::Index>(r++));
        }
    }
    return out;
}

std::size_t sample_index(std::span<const double> probs, std::mt19937_64& rng) {
    const double u = unit_uniform(rng);
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
        acc += probs[k];
        if (u < acc) return k;
    }
    // Guard against rounding in the cumulative sum: land on the last positive entry.
    for (std::size_t k = probs.size(); k-- > 0;) {
        if (probs[k] > 0.0) return k;
    }
    return probs.size() - 1;
}

Environment::Environment(std::vector<ChainSpec> chains, std::uint64_t seed)
    : chains_(std::move(chains)), rng_(seed) {
    init_states();
}

Environment::Environment(std::vector<ChainSpec> chains, std::seed_seq& seed)
    : chains_(std::move(chains)), rng_(seed) {
    init_states();
}

void Environment::init_states() {
    initial_.reserve(chains_.size());
    states_.reserve(chains_.size());
    for (const auto& c : chains_) {
        initial_.push_back(c.initial_dist.empty() ? stationary_distribution(c) : c.initial_dist);
        states_.push_back(static_cast<int>(sample_index(initial_.back(), rng_)));
    }
}

const std::vector<int>& Environment::step_all() {
    for (std::size_t i = 0; i < chains_.size(); ++i) {
        states_[i] = static_cast<int>(
            sample_index(chains_[i].transition.row(static_cast<std::size_t>(states_[i])), rng_));
    }
    return states_;
}

} // namespace clrmr
