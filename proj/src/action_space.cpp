#include "clrmr/action_space.hpp"

#include "clrmr/errors.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>

namespace clrmr {

namespace {

std::string format_coefficient(double c) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), c);
    return std::string(buf, res.ptr);
}

// Indicator bitset with canonical order: the set lacking the lowest differing
// index is smaller.
class EdgeSet {
public:
    explicit EdgeSet(std::size_t n = 0) : words_((n + 63) / 64, 0) {}

    void insert(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
    bool contains(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1U; }

    friend bool operator<(const EdgeSet& a, const EdgeSet& b) {
        for (std::size_t w = 0; w < a.words_.size(); ++w) {
            const std::uint64_t diff = a.words_[w] ^ b.words_[w];
            if (diff) {
                const int bit = std::countr_zero(diff);
                return ((a.words_[w] >> bit) & 1U) == 0;
            }
        }
        return false;
    }

private:
    std::vector<std::uint64_t> words_;
};

double tie_tolerance(double a, double b) {
    return kTieTolerance * std::max({1.0, std::abs(a), std::abs(b)});
}

struct PathLabel {
    double dist;
    EdgeSet edges;
    std::size_t node;
};

bool label_less(double da, const EdgeSet& ea, double db, const EdgeSet& eb) {
    const double tol = tie_tolerance(da, db);
    if (da < db - tol) return true;
    if (da > db + tol) return false;
    return ea < eb;
}

std::vector<std::vector<std::size_t>> out_edges(const PathGraph& g) {
    std::vector<std::vector<std::size_t>> adj(g.num_nodes);
    for (std::size_t k = 0; k < g.edges.size(); ++k) adj[g.edges[k].first].push_back(k);
    return adj;
}

// Depth-first enumeration of simple source-sink paths; visitor gets edge lists.
template <typename Visitor>
void for_each_simple_path(const PathGraph& g, std::size_t cap, Visitor&& visit) {
    const auto adj = out_edges(g);
    std::vector<char> on_path(g.num_nodes, 0);
    std::vector<std::size_t> stack_edges;
    std::size_t count = 0;

    auto dfs = [&](auto&& self, std::size_t node) -> void {
        if (node == g.sink) {
            if (++count > cap) {
                throw CapExceeded("path enumeration exceeds cap of " + std::to_string(cap));
            }
            visit(stack_edges);
            return;
        }
        on_path[node] = 1;
        for (std::size_t k : adj[node]) {
            const std::size_t next = g.edges[k].second;
            if (on_path[next]) continue;
            stack_edges.push_back(k);
            self(self, next);
            stack_edges.pop_back();
        }
        on_path[node] = 0;
    };
    dfs(dfs, g.source);
}

std::vector<std::size_t> topological_order(const PathGraph& g) {
    std::vector<std::size_t> indeg(g.num_nodes, 0);
    for (const auto& e : g.edges) ++indeg[e.second];
    const auto adj = out_edges(g);
    std::vector<std::size_t> order;
    std::vector<std::size_t> ready;
    for (std::size_t v = 0; v < g.num_nodes; ++v) {
        if (indeg[v] == 0) ready.push_back(v);
    }
    while (!ready.empty()) {
        const std::size_t v = ready.back();
        ready.pop_back();
        order.push_back(v);
        for (std::size_t k : adj[v]) {
            if (--indeg[g.edges[k].second] == 0) ready.push_back(g.edges[k].second);
        }
    }
    return order;  // shorter than num_nodes iff there is a cycle
}

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
    return a > std::numeric_limits<std::uint64_t>::max() - b
               ? std::numeric_limits<std::uint64_t>::max()
               : a + b;
}

std::uint64_t partial_permutations(std::size_t q, std::size_t m, bool& exact) {
    std::uint64_t count = 1;
    exact = true;
    for (std::size_t k = 0; k < m; ++k) {
        const std::uint64_t f = q - k;
        if (count > std::numeric_limits<std::uint64_t>::max() / f) {
            exact = false;
            return std::numeric_limits<std::uint64_t>::max();
        }
        count *= f;
    }
    return count;
}

// Objective with a canonical-order secondary key; primary ties within tolerance.
struct LexCost {
    using Key = boost::multiprecision::cpp_int;
    double primary = 0.0;
    Key secondary = 0;

    LexCost operator+(const LexCost& o) const { return {primary + o.primary, secondary + o.secondary}; }
    LexCost operator-(const LexCost& o) const { return {primary - o.primary, secondary - o.secondary}; }
};

} // namespace

const char* to_string(Sense sense) {
    return sense == Sense::Maximize ? "max" : "min";
}

int compare_objective(double a, double b, Sense sense) {
    const double tol = tie_tolerance(a, b);
    if (std::abs(a - b) <= tol) return 0;
    const bool a_better = sense == Sense::Maximize ? a > b : a < b;
    return a_better ? -1 : 1;
}

// ----------------------------------------------------------------------------
// Arm

Arm::Arm(std::vector<double> coefficients) : coefficients_(std::move(coefficients)) {
    for (std::size_t i = 0; i < coefficients_.size(); ++i) {
        const double c = coefficients_[i];
        if (!std::isfinite(c) || c < 0.0) {
            throw ValidationError("arm coefficient " + std::to_string(i) +
                                  " must be finite and nonnegative");
        }
        if (c != 0.0) {
            if (!support_.empty()) id_ += '+';
            id_ += std::to_string(i);
            if (c != 1.0) id_ += "*" + format_coefficient(c);
            support_.push_back(i);
        }
    }
}

Arm Arm::from_support(std::size_t num_chains, std::span<const std::size_t> support) {
    std::vector<double> c(num_chains, 0.0);
    for (std::size_t i : support) {
        if (i >= num_chains) throw ValidationError("arm support index out of range");
        c[i] = 1.0;
    }
    return Arm(std::move(c));
}

double Arm::max_coefficient() const {
    double m = 0.0;
    for (std::size_t i : support_) m = std::max(m, coefficients_[i]);
    return m;
}

double Arm::value(std::span<const double> weights) const {
    double v = 0.0;
    for (std::size_t i : support_) v += coefficients_[i] * weights[i];
    return v;
}

std::strong_ordering Arm::operator<=>(const Arm& other) const {
    const std::size_t n = std::min(coefficients_.size(), other.coefficients_.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (coefficients_[i] < other.coefficients_[i]) return std::strong_ordering::less;
        if (coefficients_[i] > other.coefficients_[i]) return std::strong_ordering::greater;
    }
    return coefficients_.size() <=> other.coefficients_.size();
}

// ----------------------------------------------------------------------------
// detail solvers

namespace detail {

bool is_acyclic(const PathGraph& graph) {
    return topological_order(graph).size() == graph.num_nodes;
}

std::vector<std::size_t> shortest_path(const PathGraph& g, std::span<const double> weights,
                                       std::size_t from, std::size_t to) {
    const std::size_t n_edges = g.edges.size();
    const auto adj = out_edges(g);
    constexpr double inf = std::numeric_limits<double>::infinity();

    std::vector<double> dist(g.num_nodes, inf);
    std::vector<EdgeSet> key(g.num_nodes, EdgeSet(n_edges));
    std::vector<std::size_t> pred(g.num_nodes, n_edges);
    std::vector<char> settled(g.num_nodes, 0);

    auto greater = [](const PathLabel& a, const PathLabel& b) {
        return label_less(b.dist, b.edges, a.dist, a.edges);
    };
    std::priority_queue<PathLabel, std::vector<PathLabel>, decltype(greater)> heap(greater);
    dist[from] = 0.0;
    heap.push({0.0, key[from], from});

    while (!heap.empty()) {
        PathLabel top = heap.top();
        heap.pop();
        const std::size_t u = top.node;
        if (settled[u]) continue;
        settled[u] = 1;
        if (u == to) break;
        for (std::size_t k : adj[u]) {
            const std::size_t v = g.edges[k].second;
            if (settled[v]) continue;
            const double nd = dist[u] + weights[k];
            EdgeSet nk = key[u];
            nk.insert(k);
            if (dist[v] == inf || label_less(nd, nk, dist[v], key[v])) {
                dist[v] = nd;
                key[v] = nk;
                pred[v] = k;
                heap.push({nd, std::move(nk), v});
            }
        }
    }
    if (!settled[to]) return {};

    std::vector<std::size_t> path;
    for (std::size_t v = to; v != from; v = g.edges[pred[v]].first) path.push_back(pred[v]);
    std::ranges::reverse(path);
    return path;
}

std::vector<std::size_t> assignment(std::size_t users, std::size_t channels,
                                    std::span<const double> weights, Sense sense) {
    // Potential-based Hungarian method, rows = users, O(M^2 Q).
    const std::size_t n = users;
    const std::size_t m = channels;
    double scale = 1.0;
    for (double w : weights) scale = std::max(scale, std::abs(w));
    const double tol = kTieTolerance * scale * static_cast<double>(n + 1);

    auto less = [tol](const LexCost& a, const LexCost& b) {
        if (a.primary < b.primary - tol) return true;
        if (a.primary > b.primary + tol) return false;
        return a.secondary < b.secondary;
    };

    // Canonical order prefers larger channels for earlier users.
    std::vector<LexCost::Key> place(n, 1);
    for (std::size_t u = n; u-- > 1;) place[u - 1] = place[u] * static_cast<unsigned>(m);
    auto cost = [&](std::size_t u, std::size_t c) {
        const double w = weights[u * m + c];
        return LexCost{sense == Sense::Maximize ? -w : w,
                       place[u] * static_cast<unsigned>(m - 1 - c)};
    };

    const LexCost inf{std::numeric_limits<double>::infinity(), 0};
    std::vector<LexCost> pu(n + 1), pv(m + 1);
    std::vector<std::size_t> match(m + 1, 0), way(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<LexCost> minv(m + 1, inf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = match[j0];
            LexCost delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                LexCost cur = cost(i0 - 1, j - 1) - pu[i0] - pv[j];
                if (less(cur, minv[j])) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (j1 == 0 || less(minv[j], delta)) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    pu[match[j]] = pu[match[j]] + delta;
                    pv[j] = pv[j] - delta;
                } else {
                    minv[j] = minv[j] - delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<std::size_t> channel_of(n, 0);
    for (std::size_t j = 1; j <= m; ++j) {
        if (match[j] != 0) channel_of[match[j] - 1] = j - 1;
    }
    return channel_of;
}

} // namespace detail

// ----------------------------------------------------------------------------
// ActionSet

ActionSet ActionSet::explicit_arms(std::vector<Arm> arms) {
    if (arms.empty()) throw ValidationError("explicit action set is empty");
    const std::size_t n = arms.front().num_chains();
    for (const auto& a : arms) {
        if (a.num_chains() != n) throw ValidationError("explicit arms differ in length");
        if (a.support().empty()) throw ValidationError("explicit arm has empty support");
    }
    return ActionSet(Variant(std::move(arms)), n);
}

ActionSet ActionSet::paths(PathGraph graph) {
    if (graph.source >= graph.num_nodes || graph.sink >= graph.num_nodes) {
        throw ValidationError("path graph source/sink out of range");
    }
    if (graph.source == graph.sink) throw ValidationError("path graph source equals sink");
    for (const auto& [u, v] : graph.edges) {
        if (u >= graph.num_nodes || v >= graph.num_nodes) {
            throw ValidationError("path graph edge endpoint out of range");
        }
        if (u == v) throw ValidationError("path graph contains a self-loop");
    }
    const std::size_t n = graph.edges.size();
    return ActionSet(Variant(std::move(graph)), n);
}

ActionSet ActionSet::matching(std::size_t users, std::size_t channels) {
    if (users == 0) throw ValidationError("matching needs at least one user");
    if (users > channels) throw ValidationError("matching requires users <= channels");
    return ActionSet(Variant(BipartiteMatching{users, channels}), users * channels);
}

std::string ActionSet::kind() const {
    switch (variant_.index()) {
    case 0: return "explicit";
    case 1: return "paths";
    default: return "matching";
    }
}

Arm ActionSet::solve_linear(std::span<const double> weights, Sense sense) const {
    if (weights.size() != num_chains_) throw ValidationError("weight vector length mismatch");
    for (double w : weights) {
        if (!std::isfinite(w)) throw ValidationError("weights must be finite");
    }

    if (const auto* arms = std::get_if<std::vector<Arm>>(&variant_)) {
        const Arm* best = &arms->front();
        double best_value = best->value(weights);
        for (const auto& a : *arms) {
            const double v = a.value(weights);
            const int c = compare_objective(v, best_value, sense);
            if (c < 0 || (c == 0 && a < *best)) {
                best = &a;
                best_value = v;
            }
        }
        return *best;
    }

    if (const auto* g = std::get_if<PathGraph>(&variant_)) {
        if (sense != Sense::Minimize) {
            throw ValidationError("path action sets support minimization only");
        }
        for (double w : weights) {
            if (w < 0.0) throw ValidationError("shortest-path weights must be nonnegative");
        }
        const auto path = detail::shortest_path(*g, weights, g->source, g->sink);
        if (path.empty()) throw ValidationError("no source-sink path exists");
        return Arm::from_support(num_chains_, path);
    }

    const auto& mt = std::get<BipartiteMatching>(variant_);
    const auto channel_of = detail::assignment(mt.users, mt.channels, weights, sense);
    std::vector<std::size_t> support;
    for (std::size_t u = 0; u < mt.users; ++u) support.push_back(u * mt.channels + channel_of[u]);
    std::ranges::sort(support);
    return Arm::from_support(num_chains_, support);
}

std::vector<Arm> ActionSet::enumerate_arms(std::size_t cap) const {
    std::vector<Arm> out;
    if (const auto* arms = std::get_if<std::vector<Arm>>(&variant_)) {
        if (arms->size() > cap) throw CapExceeded("explicit arm count exceeds cap");
        out = *arms;
    } else if (const auto* g = std::get_if<PathGraph>(&variant_)) {
        for_each_simple_path(*g, cap, [&](const std::vector<std::size_t>& edges) {
            out.push_back(Arm::from_support(num_chains_, edges));
        });
    } else {
        const auto& mt = std::get<BipartiteMatching>(variant_);
        bool exact = true;
        const auto count = partial_permutations(mt.channels, mt.users, exact);
        if (!exact || count > cap) {
            throw CapExceeded("matching arm count exceeds cap of " + std::to_string(cap));
        }
        out.reserve(count);
        std::vector<std::size_t> chosen;
        std::vector<char> taken(mt.channels, 0);
        auto rec = [&](auto&& self, std::size_t u) -> void {
            if (u == mt.users) {
                std::vector<std::size_t> support;
                for (std::size_t k = 0; k < mt.users; ++k) support.push_back(k * mt.channels + chosen[k]);
                out.push_back(Arm::from_support(num_chains_, support));
                return;
            }
            for (std::size_t c = 0; c < mt.channels; ++c) {
                if (taken[c]) continue;
                taken[c] = 1;
                chosen.push_back(c);
                self(self, u + 1);
                chosen.pop_back();
                taken[c] = 0;
            }
        };
        rec(rec, 0);
    }
    std::ranges::sort(out);
    return out;
}

StructureStats ActionSet::structure_stats(std::size_t cap) const {
    StructureStats s;
    s.num_chains = num_chains_;
    if (const auto* arms = std::get_if<std::vector<Arm>>(&variant_)) {
        for (const auto& a : *arms) {
            s.max_support = std::max(s.max_support, a.support().size());
            s.max_coefficient = std::max(s.max_coefficient, a.max_coefficient());
        }
        s.arm_count = arms->size();
        return s;
    }
    if (const auto* g = std::get_if<PathGraph>(&variant_)) {
        s.max_coefficient = 1.0;
        const auto order = topological_order(*g);
        if (order.size() == g->num_nodes) {
            // DAG: longest path and path count by dynamic programming.
            std::vector<long> longest(g->num_nodes, -1);
            std::vector<std::uint64_t> count(g->num_nodes, 0);
            longest[g->source] = 0;
            count[g->source] = 1;
            const auto adj = out_edges(*g);
            for (std::size_t v : order) {
                if (longest[v] < 0) continue;
                for (std::size_t k : adj[v]) {
                    const std::size_t w = g->edges[k].second;
                    longest[w] = std::max(longest[w], longest[v] + 1);
                    count[w] = saturating_add(count[w], count[v]);
                }
            }
            if (longest[g->sink] < 0) throw ValidationError("no source-sink path exists");
            s.max_support = static_cast<std::size_t>(longest[g->sink]);
            s.arm_count = count[g->sink];
            s.arm_count_exact = count[g->sink] != std::numeric_limits<std::uint64_t>::max();
            return s;
        }
        for_each_simple_path(*g, cap, [&](const std::vector<std::size_t>& edges) {
            s.max_support = std::max(s.max_support, edges.size());
            ++s.arm_count;
        });
        return s;
    }
    const auto& mt = std::get<BipartiteMatching>(variant_);
    s.max_support = mt.users;
    s.max_coefficient = 1.0;
    s.arm_count = partial_permutations(mt.channels, mt.users, s.arm_count_exact);
    return s;
}

Arm ActionSet::lowest_arm_containing(std::size_t chain) const {
    if (chain >= num_chains_) throw ValidationError("chain index out of range");

    if (const auto* arms = std::get_if<std::vector<Arm>>(&variant_)) {
        const Arm* best = nullptr;
        for (const auto& a : *arms) {
            if (a.contains(chain) && (best == nullptr || a < *best)) best = &a;
        }
        if (best == nullptr) {
            throw ValidationError("chain " + std::to_string(chain) + " belongs to no arm");
        }
        return *best;
    }

    if (const auto* g = std::get_if<PathGraph>(&variant_)) {
        if (detail::is_acyclic(*g)) {
            // In a DAG the two halves never share edges, so each half is minimized alone.
            const std::vector<double> zero(num_chains_, 0.0);
            const auto [u, v] = g->edges[chain];
            std::vector<std::size_t> head, tail;
            const bool head_ok = u == g->source || !(head = detail::shortest_path(*g, zero, g->source, u)).empty();
            const bool tail_ok = v == g->sink || !(tail = detail::shortest_path(*g, zero, v, g->sink)).empty();
            if (!head_ok || !tail_ok) {
                throw ValidationError("edge " + std::to_string(chain) + " lies on no source-sink path");
            }
            head.push_back(chain);
            head.insert(head.end(), tail.begin(), tail.end());
            return Arm::from_support(num_chains_, head);
        }
        std::optional<Arm> best;
        for_each_simple_path(*g, kDefaultEnumerationCap, [&](const std::vector<std::size_t>& edges) {
            if (std::ranges::find(edges, chain) == edges.end()) return;
            Arm a = Arm::from_support(num_chains_, edges);
            if (!best || a < *best) best = std::move(a);
        });
        if (!best) throw ValidationError("edge " + std::to_string(chain) + " lies on no source-sink path");
        return *best;
    }

    // Matching: reward 1 on the requested pair forces it in; the rest is canonical.
    std::vector<double> w(num_chains_, 0.0);
    w[chain] = 1.0;
    return solve_linear(w, Sense::Maximize);
}

std::vector<std::size_t> ActionSet::uncovered_chains() const {
    std::vector<std::size_t> out;
    if (std::holds_alternative<BipartiteMatching>(variant_)) return out;
    if (const auto* g = std::get_if<PathGraph>(&variant_); g && !detail::is_acyclic(*g)) {
        std::vector<char> seen(num_chains_, 0);
        for_each_simple_path(*g, kDefaultEnumerationCap, [&](const std::vector<std::size_t>& edges) {
            for (std::size_t k : edges) seen[k] = 1;
        });
        for (std::size_t i = 0; i < num_chains_; ++i) {
            if (!seen[i]) out.push_back(i);
        }
        return out;
    }
    for (std::size_t i = 0; i < num_chains_; ++i) {
        try {
            (void)lowest_arm_containing(i);
        } catch (const ValidationError&) {
            out.push_back(i);
        }
    }
    return out;
}

} // namespace clrmr
