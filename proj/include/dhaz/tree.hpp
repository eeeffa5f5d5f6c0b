#ifndef DHAZ_TREE_HPP
#define DHAZ_TREE_HPP

// Discrete survival trees: CART-style recursive partitioning of the
// person-period data on time and covariates with the Gini criterion,
// Laplace-corrected terminal hazards, and minimal-node-size tuning.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <nlohmann/json.hpp>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dhaz/data.hpp"
#include "dhaz/glm.hpp"

namespace dhaz {

inline double gini(long n_events, long n_rows) {
    if (n_rows < 1 || n_events < 0 || n_events > n_rows)
        throw std::invalid_argument("invalid node counts");
    double pi = static_cast<double>(n_events) / static_cast<double>(n_rows);
    return 2.0 * pi * (1.0 - pi);
}

inline double laplace(long n_events, long n_rows) {
    if (n_rows < 1) throw std::invalid_argument("empty node");
    return static_cast<double>(n_events + 1) / static_cast<double>(n_rows + 2);
}

struct SplitRule {
    enum class Kind { numeric_threshold, ordinal_threshold, factor_subset };
    std::string variable;
    Kind kind = Kind::numeric_threshold;
    double threshold = 0.0;       // midpoint between adjacent observed values
    std::vector<int> left_levels; // factor subsets, sorted level indices
};

struct TreeNode {
    bool is_leaf = true;
    SplitRule split;
    int left = -1;
    int right = -1;
    long n_rows = 0;
    long n_events = 0;
    double hazard = 0.0; // Laplace-corrected event proportion
};

struct SurvivalTree {
    std::vector<TreeNode> nodes; // nodes[0] is the root
    long min_node_size = 1;
    std::vector<std::string> candidates;
    CovariateSchema schema;

    int n_leaves() const {
        int c = 0;
        for (const auto& nd : nodes) c += nd.is_leaf ? 1 : 0;
        return c;
    }
    int n_splits() const { return n_leaves() - 1; }
};

enum class TreeCriterion { aic, bic, predictive_ll };

inline std::string criterion_name(TreeCriterion c) {
    switch (c) {
    case TreeCriterion::aic: return "AIC";
    case TreeCriterion::bic: return "BIC";
    default: return "ll";
    }
}

struct TuningResult {
    std::vector<long> grid;
    std::vector<double> criterion_values;
    long chosen = 0;
    TreeCriterion criterion = TreeCriterion::bic;
    std::vector<std::string> warnings;
};

namespace detail {

// Columnar view of the person-period rows used by the split search.
struct TreeData {
    std::vector<std::string> vars; // candidate order: as supplied
    std::vector<int> kind;         // 0 numeric, 1 ordinal (time), 2 factor
    std::vector<int> n_levels;     // factors only
    std::vector<std::vector<double>> cols;
    std::vector<std::uint8_t> y;

    long n() const { return static_cast<long>(y.size()); }
};

inline TreeData build_tree_data(const AugmentedDataset& aug,
                                const std::vector<std::string>& candidates) {
    TreeData td;
    const std::size_t n = aug.n_rows();
    // exact integer split arithmetic holds comfortably to this size
    if (n > 30000000) throw std::invalid_argument("dataset too large for the split search");
    for (const auto& name : candidates) {
        td.vars.push_back(name);
        std::vector<double> col(n);
        if (name == "timeInt") {
            td.kind.push_back(1);
            td.n_levels.push_back(0);
            for (std::size_t i = 0; i < n; ++i) col[i] = aug.rows()[i].time_interval;
        } else {
            int c = schema_column(aug.schema(), name);
            if (c < 0) throw std::invalid_argument("unknown candidate variable: " + name);
            const auto& cov = aug.schema()[static_cast<std::size_t>(c)];
            td.kind.push_back(cov.is_factor() ? 2 : 0);
            td.n_levels.push_back(cov.is_factor() ? static_cast<int>(cov.levels.size()) : 0);
            for (std::size_t i = 0; i < n; ++i)
                col[i] = aug.rows()[i].covariates[static_cast<std::size_t>(c)];
        }
        td.cols.push_back(std::move(col));
    }
    td.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) td.y[i] = static_cast<std::uint8_t>(aug.rows()[i].response);
    return td;
}

// Split quality is compared through q = eL^2/nL + eR^2/nR (larger is a
// greater impurity decrease); all comparisons are exact in 128-bit integers
// so ties resolve by candidate order and threshold order alone.
struct SplitScore {
    long long num = -1; // eL^2*nR + eR^2*nL
    long long den = 1;  // nL*nR

    static SplitScore of(long eL, long nL, long eR, long nR) {
        SplitScore s;
        s.num = static_cast<long long>(eL) * eL * nR + static_cast<long long>(eR) * eR * nL;
        s.den = static_cast<long long>(nL) * nR;
        return s;
    }
    bool better_than(const SplitScore& o) const {
        return static_cast<__int128>(num) * o.den > static_cast<__int128>(o.num) * den;
    }
    // strict positive impurity decrease against the parent counts
    bool improves(long events, long rows) const {
        return static_cast<__int128>(num) * rows >
               static_cast<__int128>(events) * events * den;
    }
};

struct FoundSplit {
    SplitRule rule;
    int var_index = -1;
    SplitScore score;
};

inline bool goes_left(const SplitRule& rule, double value) {
    if (rule.kind == SplitRule::Kind::factor_subset) {
        int lev = static_cast<int>(value);
        return std::binary_search(rule.left_levels.begin(), rule.left_levels.end(), lev);
    }
    return value < rule.threshold;
}

inline std::optional<FoundSplit> best_split_core(const TreeData& td, const std::vector<int>& idx,
                                                 long begin, long end, long min_node_size) {
    const long n = end - begin;
    if (n < 2 * min_node_size) return std::nullopt;
    long events = 0;
    for (long i = begin; i < end; ++i) events += td.y[static_cast<std::size_t>(idx[i])];
    if (events == 0 || events == n) return std::nullopt; // pure node

    std::optional<FoundSplit> best;
    std::vector<std::pair<double, std::uint8_t>> vals;

    for (std::size_t v = 0; v < td.vars.size(); ++v) {
        const auto& col = td.cols[v];
        if (td.kind[v] == 2) {
            // factor: order levels by event rate, scan ordered prefixes
            const int L = td.n_levels[v];
            std::vector<long> cnt(L, 0), evt(L, 0);
            for (long i = begin; i < end; ++i) {
                int lev = static_cast<int>(col[static_cast<std::size_t>(idx[i])]);
                ++cnt[lev];
                evt[lev] += td.y[static_cast<std::size_t>(idx[i])];
            }
            std::vector<int> present;
            for (int l = 0; l < L; ++l)
                if (cnt[l] > 0) present.push_back(l);
            if (present.size() < 2) continue;
            std::sort(present.begin(), present.end(), [&](int a, int b) {
                __int128 ra = static_cast<__int128>(evt[a]) * cnt[b];
                __int128 rb = static_cast<__int128>(evt[b]) * cnt[a];
                if (ra != rb) return ra < rb;
                return a < b;
            });
            long nL = 0, eL = 0;
            for (std::size_t p = 0; p + 1 < present.size(); ++p) {
                nL += cnt[present[p]];
                eL += evt[present[p]];
                long nR = n - nL, eR = events - eL;
                if (nL < min_node_size || nR < min_node_size) continue;
                SplitScore s = SplitScore::of(eL, nL, eR, nR);
                if (!s.improves(events, n)) continue;
                if (!best || s.better_than(best->score)) {
                    FoundSplit f;
                    f.rule.variable = td.vars[v];
                    f.rule.kind = SplitRule::Kind::factor_subset;
                    f.rule.left_levels.assign(present.begin(), present.begin() + p + 1);
                    std::sort(f.rule.left_levels.begin(), f.rule.left_levels.end());
                    f.var_index = static_cast<int>(v);
                    f.score = s;
                    best = std::move(f);
                }
            }
        } else {
            vals.clear();
            vals.reserve(static_cast<std::size_t>(n));
            for (long i = begin; i < end; ++i) {
                std::size_t r = static_cast<std::size_t>(idx[i]);
                vals.emplace_back(col[r], td.y[r]);
            }
            std::sort(vals.begin(), vals.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            long nL = 0, eL = 0;
            for (std::size_t i = 0; i < vals.size();) {
                std::size_t j = i;
                while (j < vals.size() && vals[j].first == vals[i].first) {
                    nL += 1;
                    eL += vals[j].second;
                    ++j;
                }
                if (j == vals.size()) break; // no boundary after the last group
                long nR = n - nL, eR = events - eL;
                if (nL >= min_node_size && nR >= min_node_size) {
                    SplitScore s = SplitScore::of(eL, nL, eR, nR);
                    if (s.improves(events, n) && (!best || s.better_than(best->score))) {
                        FoundSplit f;
                        f.rule.variable = td.vars[v];
                        f.rule.kind = td.kind[v] == 1 ? SplitRule::Kind::ordinal_threshold
                                                      : SplitRule::Kind::numeric_threshold;
                        f.rule.threshold = (vals[j - 1].first + vals[j].first) / 2.0;
                        f.var_index = static_cast<int>(v);
                        f.score = s;
                        best = std::move(f);
                    }
                }
                i = j;
            }
        }
    }
    return best;
}

inline SurvivalTree grow_core(const TreeData& td, long min_node_size,
                              const std::vector<std::string>& candidates,
                              const CovariateSchema& schema) {
    const long n = td.n();
    if (min_node_size < 1) throw std::invalid_argument("min_node_size must be >= 1");
    if (n < min_node_size) throw std::invalid_argument("fewer rows than min_node_size");

    SurvivalTree tree;
    tree.min_node_size = min_node_size;
    tree.candidates = candidates;
    tree.schema = schema;

    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);

    struct Frame {
        long begin, end;
        int node;
    };
    std::vector<Frame> stack;
    auto make_node = [&](long begin, long end) {
        TreeNode nd;
        nd.n_rows = end - begin;
        nd.n_events = 0;
        for (long i = begin; i < end; ++i) nd.n_events += td.y[static_cast<std::size_t>(idx[i])];
        nd.hazard = laplace(nd.n_events, nd.n_rows);
        tree.nodes.push_back(nd);
        return static_cast<int>(tree.nodes.size()) - 1;
    };
    stack.push_back({0, n, make_node(0, n)});

    while (!stack.empty()) {
        Frame fr = stack.back();
        stack.pop_back();
        auto found = best_split_core(td, idx, fr.begin, fr.end, min_node_size);
        if (!found) continue;

        const auto& col = td.cols[static_cast<std::size_t>(found->var_index)];
        auto mid_it = std::stable_partition(
            idx.begin() + fr.begin, idx.begin() + fr.end,
            [&](int r) { return goes_left(found->rule, col[static_cast<std::size_t>(r)]); });
        long mid = mid_it - idx.begin();

        tree.nodes[static_cast<std::size_t>(fr.node)].is_leaf = false;
        tree.nodes[static_cast<std::size_t>(fr.node)].split = found->rule;
        int left = make_node(fr.begin, mid);
        int right = make_node(mid, fr.end);
        tree.nodes[static_cast<std::size_t>(fr.node)].left = left;
        tree.nodes[static_cast<std::size_t>(fr.node)].right = right;
        // right pushed first so the left branch is developed first
        stack.push_back({mid, fr.end, right});
        stack.push_back({fr.begin, mid, left});
    }
    return tree;
}

} // namespace detail

// Best admissible split of a row subset, or nothing when no split has a
// positive impurity decrease with both children >= min_node_size.
inline std::optional<SplitRule> best_split(const AugmentedDataset& aug,
                                           const std::vector<int>& row_indices,
                                           const std::vector<std::string>& candidates,
                                           long min_node_size) {
    detail::TreeData td = detail::build_tree_data(aug, candidates);
    std::vector<int> idx = row_indices;
    auto found =
        detail::best_split_core(td, idx, 0, static_cast<long>(idx.size()), min_node_size);
    if (!found) return std::nullopt;
    return found->rule;
}

inline SurvivalTree grow(const AugmentedDataset& aug, const std::vector<std::string>& candidates,
                         long min_node_size) {
    detail::TreeData td = detail::build_tree_data(aug, candidates);
    return detail::grow_core(td, min_node_size, candidates, aug.schema());
}

// Route (t, x) to its terminal node hazard.
inline double predict_hazard(const SurvivalTree& tree, double t,
                             const std::vector<double>& covariates) {
    int cur = 0;
    while (!tree.nodes[static_cast<std::size_t>(cur)].is_leaf) {
        const auto& nd = tree.nodes[static_cast<std::size_t>(cur)];
        double value;
        if (nd.split.variable == "timeInt") {
            value = t;
        } else {
            int c = schema_column(tree.schema, nd.split.variable);
            if (c < 0) throw std::invalid_argument("unknown variable: " + nd.split.variable);
            value = covariates[static_cast<std::size_t>(c)];
            if (tree.schema[static_cast<std::size_t>(c)].is_factor()) {
                int lev = static_cast<int>(value);
                if (lev < 0 ||
                    lev >= static_cast<int>(tree.schema[static_cast<std::size_t>(c)].levels.size()))
                    throw std::invalid_argument("unseen factor level for " + nd.split.variable);
            }
        }
        cur = detail::goes_left(nd.split, value) ? nd.left : nd.right;
    }
    return tree.nodes[static_cast<std::size_t>(cur)].hazard;
}

// Training log-likelihood from the terminal-node counts.
inline double tree_loglik(const SurvivalTree& tree) {
    double ll = 0.0;
    for (const auto& nd : tree.nodes) {
        if (!nd.is_leaf) continue;
        ll += static_cast<double>(nd.n_events) * std::log(nd.hazard) +
              static_cast<double>(nd.n_rows - nd.n_events) * std::log1p(-nd.hazard);
    }
    return ll;
}

inline double information_criterion(const SurvivalTree& tree, const AugmentedDataset& aug,
                                    TreeCriterion kind) {
    double ll = tree_loglik(tree);
    double penalty = kind == TreeCriterion::aic
                         ? 2.0
                         : std::log(static_cast<double>(aug.n_rows()));
    return -2.0 * ll + penalty * tree.n_splits();
}

// Held-out log-likelihood of person-period rows under the tree's hazards.
inline double heldout_loglik(const SurvivalTree& tree, const AugmentedDataset& aug) {
    double ll = 0.0;
    for (const auto& row : aug.rows()) {
        double h = predict_hazard(tree, row.time_interval, row.covariates);
        ll += row.response == 1 ? std::log(h) : std::log1p(-h);
    }
    return ll;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Deterministic Fisher-Yates; std::shuffle is implementation-defined.
template <typename T>
void deterministic_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

// Fold labels per record, stratified by observed time; strata smaller than
// the fold count are merged into the next one upward.
inline std::vector<int> build_cv_folds(const Dataset& ds, int folds, std::uint64_t seed) {
    if (folds < 2) throw std::invalid_argument("need >= 2 folds");
    if (ds.size() < static_cast<std::size_t>(folds))
        throw std::invalid_argument("fewer subjects than folds");

    std::map<int, std::vector<int>> by_time;
    for (std::size_t i = 0; i < ds.size(); ++i)
        by_time[ds.records()[i].observed_time].push_back(static_cast<int>(i));

    std::vector<std::vector<int>> strata;
    std::vector<int> pending;
    for (auto& [t, members] : by_time) {
        pending.insert(pending.end(), members.begin(), members.end());
        if (pending.size() >= static_cast<std::size_t>(folds)) {
            strata.push_back(std::move(pending));
            pending.clear();
        }
    }
    if (!pending.empty()) {
        if (strata.empty()) {
            strata.push_back(std::move(pending));
        } else {
            strata.back().insert(strata.back().end(), pending.begin(), pending.end());
        }
        pending.clear();
    }

    std::mt19937_64 rng(splitmix64(seed));
    std::vector<int> fold(ds.size(), -1);
    for (auto& members : strata) {
        deterministic_shuffle(members, rng);
        for (std::size_t i = 0; i < members.size(); ++i)
            fold[static_cast<std::size_t>(members[i])] = static_cast<int>(i) % folds;
    }
    std::vector<long> count(static_cast<std::size_t>(folds), 0);
    for (int f : fold) ++count[static_cast<std::size_t>(f)];
    for (long c : count)
        if (c == 0) throw std::invalid_argument("empty fold after stratification");
    return fold;
}

inline AugmentedDataset augment_records(const std::vector<SurvivalRecord>& records,
                                        const CovariateSchema& schema, int horizon_k) {
    std::vector<AugmentedRow> rows;
    std::size_t total = 0;
    for (const auto& r : records) total += static_cast<std::size_t>(r.observed_time);
    rows.reserve(total);
    for (const auto& r : records) {
        for (int t = 1; t <= r.observed_time; ++t) {
            AugmentedRow row;
            row.subject_id = r.subject_id;
            row.time_interval = t;
            row.response = (r.status == 1 && t == r.observed_time) ? 1 : 0;
            row.covariates = r.covariates;
            rows.push_back(std::move(row));
        }
    }
    return AugmentedDataset(std::move(rows), schema, horizon_k, records.size());
}

struct CvContext {
    std::vector<TreeData> train_data;
    std::vector<AugmentedDataset> test_aug;
    std::vector<std::string> candidates;
    CovariateSchema schema;
};

inline CvContext build_cv_context(const Dataset& ds, const std::vector<std::string>& candidates,
                                  int folds, std::uint64_t seed) {
    std::vector<int> fold = build_cv_folds(ds, folds, seed);
    CvContext ctx;
    ctx.candidates = candidates;
    ctx.schema = ds.schema();
    for (int f = 0; f < folds; ++f) {
        std::vector<SurvivalRecord> train, test;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            if (fold[i] == f)
                test.push_back(ds.records()[i]);
            else
                train.push_back(ds.records()[i]);
        }
        AugmentedDataset train_aug = augment_records(train, ds.schema(), ds.horizon_k());
        ctx.train_data.push_back(build_tree_data(train_aug, candidates));
        ctx.test_aug.push_back(augment_records(test, ds.schema(), ds.horizon_k()));
    }
    return ctx;
}

inline double cv_loglik_at(const CvContext& ctx, long min_node_size) {
    double total = 0.0;
    for (std::size_t f = 0; f < ctx.train_data.size(); ++f) {
        SurvivalTree tree =
            grow_core(ctx.train_data[f], min_node_size, ctx.candidates, ctx.schema);
        total += heldout_loglik(tree, ctx.test_aug[f]);
    }
    return total / static_cast<double>(ctx.train_data.size());
}

} // namespace detail

// Mean held-out log-likelihood over time-stratified cross-validation folds.
// The dataset is last-period recoded before augmentation.
inline double predictive_loglik_cv(const Dataset& ds, const std::vector<std::string>& candidates,
                                   long min_node_size, int folds = 5, std::uint64_t seed = 1) {
    Dataset recoded = recode_last_period(ds);
    detail::CvContext ctx = detail::build_cv_context(recoded, candidates, folds, seed);
    return detail::cv_loglik_at(ctx, min_node_size);
}

struct TuneOutput {
    TuningResult result;
    SurvivalTree tree;
};

// Grow a tree per grid value, score it with the chosen criterion, and refit
// at the best minimal node size (ties broken toward the larger size).
inline TuneOutput tune(const Dataset& ds, const std::vector<std::string>& candidates,
                       std::vector<long> grid, TreeCriterion criterion, std::uint64_t seed = 1,
                       int folds = 5, int threads = 1) {
    Dataset recoded = recode_last_period(ds);
    AugmentedDataset aug = augment(recoded);
    TuneOutput out;
    out.result.criterion = criterion;

    if (grid.empty()) {
        long hi = static_cast<long>(aug.n_rows()) / 2;
        for (long g = 1; g <= hi; ++g) grid.push_back(g);
        if (grid.size() > 200) {
            std::vector<long> sub;
            std::size_t stride = (grid.size() + 199) / 200;
            for (std::size_t i = 0; i < grid.size(); i += stride) sub.push_back(grid[i]);
            grid = std::move(sub);
            out.result.warnings.push_back("default node-size grid subsampled to " +
                                          std::to_string(grid.size()) + " points");
        }
    }
    if (!std::is_sorted(grid.begin(), grid.end()))
        throw std::invalid_argument("grid must be ascending");

    detail::TreeData td = detail::build_tree_data(aug, candidates);
    std::optional<detail::CvContext> cv;
    if (criterion == TreeCriterion::predictive_ll)
        cv = detail::build_cv_context(recoded, candidates, folds, seed);

    std::vector<double> values(grid.size());
    auto eval_range = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            if (criterion == TreeCriterion::predictive_ll) {
                values[i] = detail::cv_loglik_at(*cv, grid[i]);
            } else {
                SurvivalTree t = detail::grow_core(td, grid[i], candidates, aug.schema());
                values[i] = information_criterion(t, aug, criterion);
            }
        }
    };
    if (threads > 1 && grid.size() > 1) {
        int nw = std::min<int>(threads, static_cast<int>(grid.size()));
        std::vector<std::future<void>> futures;
        std::size_t chunk = (grid.size() + nw - 1) / static_cast<std::size_t>(nw);
        for (int w = 0; w < nw; ++w) {
            std::size_t lo = static_cast<std::size_t>(w) * chunk;
            std::size_t hi = std::min(grid.size(), lo + chunk);
            if (lo >= hi) break;
            futures.push_back(std::async(std::launch::async, eval_range, lo, hi));
        }
        for (auto& f : futures) f.get();
    } else {
        eval_range(0, grid.size());
    }

    const bool maximize = criterion == TreeCriterion::predictive_ll;
    std::size_t best = 0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        bool take = maximize ? values[i] >= values[best] : values[i] <= values[best];
        if (take) best = i; // >= / <= keeps the largest node size among ties
    }

    out.result.grid = grid;
    out.result.criterion_values = values;
    out.result.chosen = grid[best];
    out.tree = detail::grow_core(td, out.result.chosen, candidates, aug.schema());
    if (out.tree.n_splits() == 0 && grid.size() > 1) {
        bool all_root = true;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            SurvivalTree t = detail::grow_core(td, grid[i], candidates, aug.schema());
            if (t.n_splits() > 0) {
                all_root = false;
                break;
            }
        }
        if (all_root) out.result.warnings.push_back("every candidate tree is a single root node");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rendering and serialization

inline std::string describe_split(const SplitRule& rule, const CovariateSchema& schema,
                                  bool negate) {
    std::ostringstream os;
    if (rule.kind == SplitRule::Kind::factor_subset) {
        int c = schema_column(schema, rule.variable);
        os << rule.variable << (negate ? " not in {" : " in {");
        for (std::size_t i = 0; i < rule.left_levels.size(); ++i) {
            if (i) os << ",";
            os << schema[static_cast<std::size_t>(c)].levels[static_cast<std::size_t>(rule.left_levels[i])];
        }
        os << "}";
    } else {
        os << rule.variable << (negate ? " >= " : " < ") << format_g6(rule.threshold);
    }
    return os.str();
}

inline void render_tree_text(const SurvivalTree& tree, std::ostream& os) {
    struct Item {
        int node;
        int depth;
        std::string label;
    };
    std::vector<Item> stack{{0, 0, "root"}};
    while (!stack.empty()) {
        Item it = stack.back();
        stack.pop_back();
        const auto& nd = tree.nodes[static_cast<std::size_t>(it.node)];
        for (int d = 0; d < it.depth; ++d) os << "|  ";
        os << it.label << "  (n=" << nd.n_rows << ", events=" << nd.n_events;
        if (nd.is_leaf)
            os << ")  hazard=" << format_g6(nd.hazard) << " *\n";
        else
            os << ")\n";
        if (!nd.is_leaf) {
            stack.push_back({nd.right, it.depth + 1, describe_split(nd.split, tree.schema, true)});
            stack.push_back({nd.left, it.depth + 1, describe_split(nd.split, tree.schema, false)});
        }
    }
}

namespace detail {

inline nlohmann::json node_to_json(const SurvivalTree& tree, int node) {
    const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
    nlohmann::json j;
    j["n"] = nd.n_rows;
    j["events"] = nd.n_events;
    j["hazard"] = nd.hazard;
    if (!nd.is_leaf) {
        nlohmann::json split;
        split["variable"] = nd.split.variable;
        split["kind"] = nd.split.kind == SplitRule::Kind::factor_subset ? "factor-subset"
                        : nd.split.kind == SplitRule::Kind::ordinal_threshold
                            ? "ordinal-threshold"
                            : "numeric-threshold";
        if (nd.split.kind == SplitRule::Kind::factor_subset) {
            int c = schema_column(tree.schema, nd.split.variable);
            std::vector<std::string> levels;
            for (int l : nd.split.left_levels)
                levels.push_back(tree.schema[static_cast<std::size_t>(c)].levels[static_cast<std::size_t>(l)]);
            split["left_levels"] = levels;
        } else {
            split["threshold"] = nd.split.threshold;
        }
        j["split"] = split;
        j["left"] = node_to_json(tree, nd.left);
        j["right"] = node_to_json(tree, nd.right);
    }
    return j;
}

inline int node_from_json(const nlohmann::json& j, SurvivalTree& tree) {
    TreeNode nd;
    nd.n_rows = j.at("n").get<long>();
    nd.n_events = j.at("events").get<long>();
    nd.hazard = j.at("hazard").get<double>();
    int self = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(nd);
    if (j.contains("split")) {
        const auto& split = j.at("split");
        SplitRule rule;
        rule.variable = split.at("variable").get<std::string>();
        std::string kind = split.at("kind").get<std::string>();
        rule.kind = kind == "factor-subset" ? SplitRule::Kind::factor_subset
                    : kind == "ordinal-threshold" ? SplitRule::Kind::ordinal_threshold
                                                  : SplitRule::Kind::numeric_threshold;
        if (rule.kind == SplitRule::Kind::factor_subset) {
            int c = schema_column(tree.schema, rule.variable);
            for (const auto& name : split.at("left_levels").get<std::vector<std::string>>()) {
                const auto& levels = tree.schema[static_cast<std::size_t>(c)].levels;
                auto it = std::find(levels.begin(), levels.end(), name);
                rule.left_levels.push_back(static_cast<int>(it - levels.begin()));
            }
            std::sort(rule.left_levels.begin(), rule.left_levels.end());
        } else {
            rule.threshold = split.at("threshold").get<double>();
        }
        int left = node_from_json(j.at("left"), tree);
        int right = node_from_json(j.at("right"), tree);
        tree.nodes[static_cast<std::size_t>(self)].is_leaf = false;
        tree.nodes[static_cast<std::size_t>(self)].split = rule;
        tree.nodes[static_cast<std::size_t>(self)].left = left;
        tree.nodes[static_cast<std::size_t>(self)].right = right;
    }
    return self;
}

} // namespace detail

inline nlohmann::json to_json(const SurvivalTree& tree) {
    nlohmann::json j;
    j["type"] = "survival-tree";
    j["min_node_size"] = tree.min_node_size;
    j["n_splits"] = tree.n_splits();
    j["candidates"] = tree.candidates;
    j["schema"] = schema_to_json(tree.schema);
    j["root"] = detail::node_to_json(tree, 0);
    return j;
}

inline SurvivalTree tree_from_json(const nlohmann::json& j) {
    SurvivalTree tree;
    tree.min_node_size = j.at("min_node_size").get<long>();
    tree.candidates = j.at("candidates").get<std::vector<std::string>>();
    tree.schema = schema_from_json(j.at("schema"));
    detail::node_from_json(j.at("root"), tree);
    return tree;
}

} // namespace dhaz

#endif
