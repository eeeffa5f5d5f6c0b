// Command-line front end: person-period augmentation, hazard regression,
// survival trees, diagnostics, and data simulation with reproducible,
// machine-readable outputs.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "dhaz/dhaz.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOptions {
    std::string input;
    std::string time_column;
    std::string status_column;
    std::string event_label;
    int horizon = 0; // 0 = infer from the data
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    int threads = 1;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool needs_columns = true) {
    cmd->add_option("input", opts.input, "input CSV file")->required();
    auto* t = cmd->add_option("--time", opts.time_column, "name of the observed-time column");
    auto* s = cmd->add_option("--status", opts.status_column, "name of the event-indicator column");
    if (needs_columns) {
        t->required();
        s->required();
    }
    cmd->add_option("--event-label", opts.event_label,
                    "status label counted as an event (for labeled status columns)");
    cmd->add_option("--horizon", opts.horizon, "override the time horizon k");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "random seed");
    cmd->add_option("--threads", opts.threads, "worker cap for tuning grids");
}

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::uint64_t h = 14695981039346656037ULL;
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

std::string out_path(const CommonOptions& opts, const std::string& name) {
    fs::create_directories(opts.out_dir);
    return (fs::path(opts.out_dir) / name).string();
}

void write_manifest(const CommonOptions& opts, const std::string& subcommand,
                    const json& config, const std::vector<std::string>& outputs) {
    json m;
    m["tool"] = "dhaz";
    m["version"] = dhaz::kVersion;
    m["subcommand"] = subcommand;
    m["config"] = config;
    m["seed"] = opts.seed;
    if (!opts.input.empty()) {
        m["input"] = opts.input;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a64_file(opts.input)));
        m["input_fnv1a64"] = buf;
    }
    m["outputs"] = outputs;
    std::ofstream out(out_path(opts, "run.json"));
    out << m.dump(2) << "\n";
}

json common_config(const CommonOptions& opts) {
    json c;
    c["input"] = opts.input;
    c["time"] = opts.time_column;
    c["status"] = opts.status_column;
    c["event_label"] = opts.event_label;
    c["horizon"] = opts.horizon;
    c["out"] = opts.out_dir;
    c["seed"] = opts.seed;
    c["threads"] = opts.threads;
    return c;
}

struct Loaded {
    dhaz::Dataset ds;
    dhaz::IngestReport report;
};

Loaded load_dataset(const CommonOptions& opts) {
    dhaz::CsvTable table = dhaz::read_csv(opts.input);
    dhaz::CovariateSchema schema =
        dhaz::infer_schema(table, opts.time_column, opts.status_column);
    dhaz::IngestReport report;
    dhaz::Dataset ds = dhaz::ingest_table(table, opts.time_column, opts.status_column, schema,
                                          &report, opts.event_label);
    if (opts.horizon > 0) {
        if (opts.horizon < ds.horizon_k())
            throw std::invalid_argument("horizon override below the largest observed time");
        ds = ds.with_horizon(opts.horizon);
    }
    return {std::move(ds), report};
}

void write_wald_csv(const std::string& path, const std::vector<dhaz::WaldRow>& rows) {
    std::vector<std::vector<std::string>> cells;
    for (const auto& r : rows) {
        cells.push_back({r.name, dhaz::format_g6(r.estimate), dhaz::format_g6(r.se),
                         dhaz::format_g6(r.z),
                         r.degenerate ? "NA" : dhaz::format_g6(r.p)});
    }
    dhaz::write_csv(path, {"term", "coef", "se", "z", "p"}, cells);
}

void write_curve_csv(const std::string& path, const dhaz::SmoothCurve& curve, dhaz::Link link,
                     bool with_hazard) {
    std::vector<std::string> header{"grid", "fit", "lower", "upper"};
    if (with_hazard) header.push_back("hazard");
    std::vector<std::vector<std::string>> cells;
    for (Eigen::Index i = 0; i < curve.grid.size(); ++i) {
        std::vector<std::string> row{
            dhaz::format_g6(curve.grid[i]), dhaz::format_g6(curve.fit[i]),
            dhaz::format_g6(curve.lower[i]), dhaz::format_g6(curve.upper[i])};
        if (with_hazard) row.push_back(dhaz::format_g6(dhaz::link_inverse(link, curve.fit[i])));
        cells.push_back(std::move(row));
    }
    dhaz::write_csv(path, header, cells);
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

// ---------------------------------------------------------------------------

int cmd_augment(const CommonOptions& opts) {
    Loaded loaded = load_dataset(opts);
    std::cout << "n=" << loaded.ds.size() << " horizon_k=" << loaded.ds.horizon_k()
              << " dropped_rows=" << loaded.report.dropped_rows
              << " censoring_rate=" << dhaz::format_g6(dhaz::censoring_rate(loaded.ds)) << "\n";
    dhaz::AugmentedDataset aug = dhaz::augment(dhaz::recode_last_period(loaded.ds));
    std::cout << "augmented_rows=" << aug.n_rows() << "\n";
    std::string out = out_path(opts, "augmented.csv");
    dhaz::write_augmented_csv(out, aug);
    write_manifest(opts, "augment", common_config(opts), {out});
    return 0;
}

dhaz::ParametricHazardModel fit_intercept_only(const dhaz::AugmentedDataset& aug,
                                               dhaz::Link link) {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(aug.n_rows()), 1);
    Eigen::VectorXd y(static_cast<Eigen::Index>(aug.n_rows()));
    for (std::size_t i = 0; i < aug.n_rows(); ++i)
        y[static_cast<Eigen::Index>(i)] = aug.rows()[i].response;
    dhaz::IrlsOptions irls;
    irls.link = link;
    dhaz::IrlsResult r = dhaz::fit_irls(X, y, nullptr, irls);

    dhaz::ParametricHazardModel m;
    m.link = link;
    m.horizon_k = aug.horizon_k();
    for (int t = 1; t < aug.horizon_k(); ++t) {
        m.time_values.push_back(t);
        m.intercepts.push_back(r.beta[0]);
    }
    int p = static_cast<int>(m.time_values.size());
    m.covariance = Eigen::MatrixXd::Constant(p, p, r.covariance(0, 0));
    // no covariates enter the model, so the schema is empty
    m.loglik = r.loglik;
    m.iterations = r.iterations;
    m.converged = r.converged;
    m.warnings = r.warnings;
    return m;
}

int cmd_fit(const CommonOptions& opts, const std::string& formula_text,
            const std::string& link_name_str) {
    dhaz::Link link = dhaz::link_from_name(link_name_str);
    Loaded loaded = load_dataset(opts);
    dhaz::Dataset recoded = dhaz::recode_last_period(loaded.ds);
    dhaz::AugmentedDataset aug = dhaz::augment(recoded);
    dhaz::FormulaSpec formula = dhaz::parse_formula(formula_text);

    json config = common_config(opts);
    config["formula"] = formula_text;
    config["link"] = link_name_str;
    std::vector<std::string> outputs;
    bool converged = true;

    if (formula.intercept_only) {
        dhaz::ParametricHazardModel m = fit_intercept_only(aug, link);
        print_warnings(m.warnings);
        converged = m.converged;
        std::string mp = out_path(opts, "model.json");
        std::ofstream(mp) << dhaz::to_json(m).dump(2) << "\n";
        outputs.push_back(mp);
        std::vector<std::vector<std::string>> base;
        for (std::size_t j = 0; j < m.time_values.size(); ++j)
            base.push_back({std::to_string(m.time_values[j]), dhaz::format_g6(m.intercepts[j]),
                            dhaz::format_g6(dhaz::link_inverse(m.link, m.intercepts[j]))});
        std::string bp = out_path(opts, "baseline.csv");
        dhaz::write_csv(bp, {"t", "eta", "hazard"}, base);
        outputs.push_back(bp);
        std::cout << "loglik=" << dhaz::format_g6(m.loglik)
                  << " hazard=" << dhaz::format_g6(dhaz::predict_hazard(m, 1, {})) << "\n";
    } else if (formula.time_term == dhaz::FormulaSpec::TimeTerm::dummies) {
        if (!formula.smooths.empty())
            throw std::invalid_argument("covariate smooths require time(spline[...])");
        // keep only the requested covariates in the design
        for (const auto& name : formula.linear)
            if (dhaz::schema_column(aug.schema(), name) < 0)
                throw std::invalid_argument("unknown covariate in formula: " + name);
        dhaz::CovariateSchema sub;
        for (const auto& name : formula.linear)
            sub.push_back(aug.schema()[static_cast<std::size_t>(
                dhaz::schema_column(aug.schema(), name))]);
        std::vector<int> cols;
        for (const auto& cov : sub)
            cols.push_back(dhaz::schema_column(aug.schema(), cov.name));
        std::vector<dhaz::AugmentedRow> rows = aug.rows();
        for (auto& row : rows) {
            std::vector<double> vals;
            for (int c : cols) vals.push_back(row.covariates[static_cast<std::size_t>(c)]);
            row.covariates = std::move(vals);
        }
        dhaz::AugmentedDataset sub_aug(std::move(rows), sub, aug.horizon_k(), aug.n_subjects());

        dhaz::IrlsOptions irls;
        irls.link = link;
        dhaz::ParametricHazardModel m = dhaz::fit_parametric(sub_aug, irls);
        print_warnings(m.warnings);
        converged = m.converged;

        std::string mp = out_path(opts, "model.json");
        std::ofstream(mp) << dhaz::to_json(m).dump(2) << "\n";
        outputs.push_back(mp);
        std::string wp = out_path(opts, "wald.csv");
        write_wald_csv(wp, dhaz::wald_table(m));
        outputs.push_back(wp);

        std::vector<std::vector<std::string>> base;
        for (std::size_t j = 0; j < m.time_values.size(); ++j) {
            double eta = m.intercepts[j];
            base.push_back({std::to_string(m.time_values[j]), dhaz::format_g6(eta),
                            dhaz::format_g6(dhaz::link_inverse(m.link, eta))});
        }
        std::string bp = out_path(opts, "baseline.csv");
        dhaz::write_csv(bp, {"t", "eta", "hazard"}, base);
        outputs.push_back(bp);

        std::cout << "loglik=" << dhaz::format_g6(m.loglik) << " iterations=" << m.iterations
                  << " converged=" << (m.converged ? "yes" : "no") << "\n";
        for (std::size_t j = 0; j < m.coef_names.size(); ++j)
            std::cout << m.coef_names[j] << "=" << dhaz::format_g6(m.coefficients[j]) << "\n";
    } else if (formula.time_term == dhaz::FormulaSpec::TimeTerm::spline) {
        std::vector<dhaz::SplineBasisSpec> smooths;
        dhaz::SplineBasisSpec time_spec;
        time_spec.variable = dhaz::kTimeVariable;
        time_spec.n_basis = formula.time_spline.n_basis > 0 ? formula.time_spline.n_basis : 10;
        time_spec.degree = formula.time_spline.degree;
        time_spec.penalty_order = formula.time_spline.penalty_order;
        smooths.push_back(time_spec);
        for (const auto& sm : formula.smooths) {
            dhaz::SplineBasisSpec spec;
            spec.variable = sm.name;
            spec.n_basis = sm.n_basis > 0 ? sm.n_basis : 20;
            spec.degree = sm.degree;
            spec.penalty_order = sm.penalty_order;
            smooths.push_back(spec);
        }
        dhaz::IrlsOptions irls;
        irls.link = link;
        dhaz::AdditiveHazardModel m = dhaz::fit_additive(aug, smooths, formula.linear, nullptr, irls);
        print_warnings(m.warnings);
        converged = m.converged;

        std::string mp = out_path(opts, "model.json");
        std::ofstream(mp) << dhaz::to_json(m).dump(2) << "\n";
        outputs.push_back(mp);

        // linear-coefficient inference from the penalized covariance
        std::vector<dhaz::WaldRow> wald;
        int off = m.baseline.spec.n_basis;
        for (const auto& t : m.smooths) off += t.spec.n_basis;
        for (std::size_t j = 0; j < m.linear_names.size(); ++j) {
            dhaz::WaldRow r;
            r.name = m.linear_names[j];
            r.estimate = m.linear_coefficients[static_cast<Eigen::Index>(j)];
            double var = m.covariance(off + static_cast<int>(j), off + static_cast<int>(j));
            r.se = var > 0 ? std::sqrt(var) : 0.0;
            r.degenerate = r.se == 0.0;
            r.z = r.degenerate ? 0.0 : r.estimate / r.se;
            r.p = r.degenerate ? std::numeric_limits<double>::quiet_NaN()
                               : dhaz::normal_two_sided_p(r.z);
            wald.push_back(r);
        }
        std::string wp = out_path(opts, "wald.csv");
        write_wald_csv(wp, wald);
        outputs.push_back(wp);

        auto grid_for = [](double lo, double hi) {
            Eigen::VectorXd g(200);
            for (int i = 0; i < 200; ++i) g[i] = lo + (hi - lo) * i / 199.0;
            return g;
        };
        dhaz::SmoothCurve base = dhaz::evaluate_smooth(
            m, dhaz::kTimeVariable, grid_for(1.0, static_cast<double>(m.horizon_k - 1)), true);
        std::string bp = out_path(opts, "baseline.csv");
        write_curve_csv(bp, base, m.link, true);
        outputs.push_back(bp);
        for (const auto& term : m.smooths) {
            dhaz::SmoothCurve curve = dhaz::evaluate_smooth(
                m, term.spec.variable,
                grid_for(term.spec.span_lo(), term.spec.span_hi()), true);
            std::string sp = out_path(opts, "smooth_" + term.spec.variable + ".csv");
            write_curve_csv(sp, curve, m.link, false);
            outputs.push_back(sp);
        }

        std::cout << "loglik=" << dhaz::format_g6(m.loglik)
                  << " gcv=" << dhaz::format_g6(m.gcv)
                  << " converged=" << (m.converged ? "yes" : "no") << "\n";
        std::cout << "delta_" << dhaz::kTimeVariable << "=" << dhaz::format_g6(m.baseline.delta)
                  << " edf=" << dhaz::format_g6(m.baseline.edf) << "\n";
        for (const auto& t : m.smooths)
            std::cout << "delta_" << t.spec.variable << "=" << dhaz::format_g6(t.delta)
                      << " edf=" << dhaz::format_g6(t.edf) << "\n";
        for (std::size_t j = 0; j < m.linear_names.size(); ++j)
            std::cout << m.linear_names[j] << "="
                      << dhaz::format_g6(m.linear_coefficients[static_cast<Eigen::Index>(j)])
                      << "\n";
    } else {
        throw std::invalid_argument("formula needs a time term or \"y ~ 1\"");
    }

    write_manifest(opts, "fit", config, outputs);
    return converged ? 0 : 3;
}

int cmd_tree(const CommonOptions& opts, const std::string& criterion_text,
             const std::string& grid_text, int folds, const std::string& candidates_text) {
    dhaz::TreeCriterion criterion;
    if (criterion_text == "AIC")
        criterion = dhaz::TreeCriterion::aic;
    else if (criterion_text == "BIC")
        criterion = dhaz::TreeCriterion::bic;
    else if (criterion_text == "ll")
        criterion = dhaz::TreeCriterion::predictive_ll;
    else
        throw std::invalid_argument("criterion must be AIC, BIC or ll");

    std::vector<long> grid;
    if (!grid_text.empty()) {
        auto parts = dhaz::detail::split_top(grid_text, ':');
        if (parts.size() == 1) {
            grid.push_back(std::stol(parts[0]));
        } else if (parts.size() == 2 || parts.size() == 3) {
            long lo = std::stol(parts[0]);
            long hi = std::stol(parts[1]);
            long step = parts.size() == 3 ? std::stol(parts[2]) : 1;
            if (step < 1 || hi < lo) throw std::invalid_argument("bad grid: " + grid_text);
            for (long g = lo; g <= hi; g += step) grid.push_back(g);
        } else {
            throw std::invalid_argument("bad grid: " + grid_text);
        }
    }

    Loaded loaded = load_dataset(opts);
    std::vector<std::string> candidates;
    if (candidates_text.empty()) {
        candidates.push_back("timeInt");
        for (const auto& cov : loaded.ds.schema()) candidates.push_back(cov.name);
    } else {
        for (const auto& name : dhaz::detail::split_top(candidates_text, ','))
            candidates.push_back(name);
    }

    dhaz::TuneOutput out =
        dhaz::tune(loaded.ds, candidates, grid, criterion, opts.seed, folds, opts.threads);
    print_warnings(out.result.warnings);

    std::string tj = out_path(opts, "tree.json");
    std::ofstream(tj) << dhaz::to_json(out.tree).dump(2) << "\n";
    std::string tt = out_path(opts, "tree.txt");
    {
        std::ofstream text(tt);
        dhaz::render_tree_text(out.tree, text);
    }
    std::string tc = out_path(opts, "tuning.csv");
    {
        std::vector<std::vector<std::string>> cells;
        for (std::size_t i = 0; i < out.result.grid.size(); ++i)
            cells.push_back({std::to_string(out.result.grid[i]),
                             dhaz::format_g6(out.result.criterion_values[i])});
        dhaz::write_csv(tc, {"min_node_size", criterion_text}, cells);
    }

    json config = common_config(opts);
    config["criterion"] = criterion_text;
    config["grid"] = grid_text;
    config["folds"] = folds;
    config["candidates"] = candidates;
    write_manifest(opts, "tree", config, {tj, tt, tc});

    std::cout << "chosen_min_node_size=" << out.result.chosen
              << " n_splits=" << out.tree.n_splits()
              << " terminal_nodes=" << out.tree.n_leaves() << "\n";
    return 0;
}

int cmd_diagnose(const CommonOptions& opts, const std::string& model_path, int K,
                 const std::string& residual_vs) {
    std::ifstream in(model_path);
    if (!in) throw std::invalid_argument("cannot open model file: " + model_path);
    json mj = json::parse(in);
    std::string type = mj.value("type", "parametric");

    Loaded loaded = load_dataset(opts);
    dhaz::Dataset recoded = dhaz::recode_last_period(loaded.ds);
    dhaz::AugmentedDataset aug = dhaz::augment(recoded);

    // the model may use a subset of the data's covariates
    dhaz::CovariateSchema model_schema = dhaz::schema_from_json(mj.at("schema"));
    std::vector<int> remap;
    for (const auto& cov : model_schema) {
        int col = dhaz::schema_column(loaded.ds.schema(), cov.name);
        if (col < 0) throw std::invalid_argument("model/data schema mismatch: missing " + cov.name);
        const auto& dcov = loaded.ds.schema()[static_cast<std::size_t>(col)];
        if (dcov.kind != cov.kind || dcov.levels != cov.levels)
            throw std::invalid_argument("model/data schema mismatch: " + cov.name);
        remap.push_back(col);
    }
    auto project = [&](const std::vector<double>& covs) {
        std::vector<double> out;
        out.reserve(remap.size());
        for (int c : remap) out.push_back(covs[static_cast<std::size_t>(c)]);
        return out;
    };

    std::function<double(int, const std::vector<double>&)> hazard_fn;
    dhaz::ParametricHazardModel pm;
    dhaz::AdditiveHazardModel am;
    if (type == "parametric") {
        pm = dhaz::parametric_from_json(mj);
        hazard_fn = [&](int t, const std::vector<double>& c) {
            return dhaz::predict_hazard(pm, t, project(c));
        };
    } else if (type == "additive") {
        am = dhaz::additive_from_json(mj);
        hazard_fn = [&](int t, const std::vector<double>& c) {
            return dhaz::predict_hazard(am, t, project(c));
        };
    } else {
        throw std::invalid_argument("unsupported model type: " + type);
    }

    dhaz::CalibrationTable table = dhaz::calibration(aug, hazard_fn, K);
    print_warnings(table.warnings);
    std::string cp = out_path(opts, "calibration.csv");
    {
        std::vector<std::vector<std::string>> cells;
        for (std::size_t g = 0; g < table.groups.size(); ++g) {
            const auto& grp = table.groups[g];
            cells.push_back({std::to_string(g + 1), std::to_string(grp.n),
                             dhaz::format_g6(grp.mean_fitted), dhaz::format_g6(grp.empirical)});
        }
        dhaz::write_csv(cp, {"group", "n", "mean_fitted", "empirical"}, cells);
    }
    std::vector<std::string> outputs{cp};

    if (!residual_vs.empty()) {
        int col = dhaz::schema_column(loaded.ds.schema(), residual_vs);
        if (col < 0) throw std::invalid_argument("unknown covariate: " + residual_vs);
        if (loaded.ds.schema()[static_cast<std::size_t>(col)].is_factor())
            throw std::invalid_argument("residual trend needs a numeric covariate");

        dhaz::ResidualSet res = dhaz::martingale_residuals(recoded, hazard_fn);
        std::vector<double> x, r;
        std::vector<std::vector<std::string>> cells;
        for (std::size_t i = 0; i < res.residuals.size(); ++i) {
            double xv = recoded.records()[i].covariates[static_cast<std::size_t>(col)];
            x.push_back(xv);
            r.push_back(res.residuals[i].residual);
            cells.push_back({std::to_string(res.residuals[i].subject_id), dhaz::format_g6(xv),
                             dhaz::format_g6(res.residuals[i].residual)});
        }
        std::string rp = out_path(opts, "residuals.csv");
        dhaz::write_csv(rp, {"subject_id", residual_vs, "residual"}, cells);
        outputs.push_back(rp);

        dhaz::TrendCurve trend = dhaz::residual_trend(x, r);
        print_warnings(trend.warnings);
        std::vector<std::vector<std::string>> tcells;
        for (std::size_t g = 0; g < trend.grid.size(); ++g)
            tcells.push_back({dhaz::format_g6(trend.grid[g]), dhaz::format_g6(trend.trend[g])});
        std::string tp = out_path(opts, "trend.csv");
        dhaz::write_csv(tp, {"grid", "trend"}, tcells);
        outputs.push_back(tp);
    }

    json config = common_config(opts);
    config["model"] = model_path;
    config["K"] = K;
    config["residual_vs"] = residual_vs;
    write_manifest(opts, "diagnose", config, outputs);
    std::cout << "calibration_groups=" << table.groups.size() << "\n";
    return 0;
}

int cmd_simulate(const CommonOptions& opts, long n, int k, const std::string& baseline_text,
                 const std::vector<std::string>& coef_texts,
                 const std::vector<std::string>& covariate_texts,
                 const std::string& censoring_text) {
    dhaz::GeneratorSpec gen;
    gen.n_subjects = n;
    gen.horizon_k = k;
    gen.seed = opts.seed;

    auto parts = dhaz::detail::split_top(baseline_text, ',');
    if (parts.size() == 1) {
        gen.baseline.assign(static_cast<std::size_t>(k - 1), std::stod(parts[0]));
    } else {
        for (const auto& p : parts) gen.baseline.push_back(std::stod(p));
    }

    for (const auto& text : covariate_texts) {
        auto eq = text.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("covariate spec needs name=law: " + text);
        dhaz::CovariateLaw law;
        law.name = text.substr(0, eq);
        std::string rhs = text.substr(eq + 1);
        auto colon = rhs.find(':');
        std::string kind = rhs.substr(0, colon);
        std::vector<std::string> args;
        if (colon != std::string::npos)
            args = dhaz::detail::split_top(rhs.substr(colon + 1), ',');
        if (kind == "normal") {
            law.kind = dhaz::CovariateLaw::Kind::normal;
            law.a = args.size() > 0 ? std::stod(args[0]) : 0.0;
            law.b = args.size() > 1 ? std::stod(args[1]) : 1.0;
        } else if (kind == "uniform") {
            law.kind = dhaz::CovariateLaw::Kind::uniform;
            law.a = args.size() > 0 ? std::stod(args[0]) : 0.0;
            law.b = args.size() > 1 ? std::stod(args[1]) : 1.0;
        } else if (kind == "bernoulli") {
            law.kind = dhaz::CovariateLaw::Kind::bernoulli;
            law.a = args.size() > 0 ? std::stod(args[0]) : 0.5;
        } else {
            throw std::invalid_argument("unknown covariate law: " + kind);
        }
        gen.covariates.push_back(law);
    }
    for (const auto& text : coef_texts) {
        auto eq = text.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("coefficient needs name=value: " + text);
        gen.linear_effects.emplace_back(text.substr(0, eq), std::stod(text.substr(eq + 1)));
    }

    if (censoring_text == "none") {
        gen.censoring = dhaz::CensoringLaw::none;
    } else if (censoring_text == "uniform") {
        gen.censoring = dhaz::CensoringLaw::uniform_over_horizon;
    } else if (censoring_text.rfind("geometric:", 0) == 0) {
        gen.censoring = dhaz::CensoringLaw::geometric;
        gen.geometric_p = std::stod(censoring_text.substr(10));
    } else {
        throw std::invalid_argument("censoring must be none, uniform or geometric:p");
    }

    dhaz::Dataset ds = dhaz::simulate(gen);
    std::string sp = out_path(opts, "sim.csv");
    dhaz::write_dataset_csv(sp, ds);

    json config = common_config(opts);
    config["n"] = n;
    config["k"] = k;
    config["baseline"] = baseline_text;
    config["coef"] = coef_texts;
    config["covariate"] = covariate_texts;
    config["censoring"] = censoring_text;
    write_manifest(opts, "simulate", config, {sp});
    std::cout << "n=" << ds.size()
              << " censoring_rate=" << dhaz::format_g6(dhaz::censoring_rate(ds)) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"discrete time-to-event regression: augmentation, hazard models, survival "
                 "trees, diagnostics, simulation"};
    app.require_subcommand(1);

    CommonOptions aug_opts;
    CLI::App* augment_cmd = app.add_subcommand("augment", "expand a dataset to person-period rows");
    add_common(augment_cmd, aug_opts);

    CommonOptions fit_opts;
    std::string formula_text, link_text = "logit";
    CLI::App* fit_cmd = app.add_subcommand("fit", "fit a discrete hazard regression model");
    add_common(fit_cmd, fit_opts);
    fit_cmd->add_option("--formula", formula_text, "model formula, e.g. y ~ time(dummies) + age")
        ->required();
    fit_cmd->add_option("--link", link_text, "logit or cloglog");

    CommonOptions tree_opts;
    std::string criterion_text = "BIC", grid_text, candidates_text;
    int folds = 5;
    CLI::App* tree_cmd = app.add_subcommand("tree", "tune and grow a discrete survival tree");
    add_common(tree_cmd, tree_opts);
    tree_cmd->add_option("--criterion", criterion_text, "AIC, BIC or ll");
    tree_cmd->add_option("--grid", grid_text, "minimal node sizes, lo:hi:step");
    tree_cmd->add_option("--folds", folds, "cross-validation folds for ll");
    tree_cmd->add_option("--candidates", candidates_text,
                         "comma-separated split variables (default: timeInt and all covariates)");

    CommonOptions diag_opts;
    std::string model_path, residual_vs;
    int K = 10;
    CLI::App* diag_cmd = app.add_subcommand("diagnose", "calibration and martingale residuals");
    add_common(diag_cmd, diag_opts);
    diag_cmd->add_option("--model", model_path, "fitted model JSON")->required();
    diag_cmd->add_option("--groups", K, "number of calibration groups");
    diag_cmd->add_option("--residual-vs", residual_vs, "covariate for the residual trend");

    CommonOptions sim_opts;
    long sim_n = 1000;
    int sim_k = 10;
    std::string baseline_text = "-1.5", censoring_text = "none";
    std::vector<std::string> coef_texts, covariate_texts;
    CLI::App* sim_cmd = app.add_subcommand("simulate", "draw a dataset from a known hazard law");
    sim_cmd->add_option("--n", sim_n, "number of subjects")->required();
    sim_cmd->add_option("--k", sim_k, "time horizon")->required();
    sim_cmd->add_option("--baseline", baseline_text, "baseline log-odds, constant or k-1 values");
    sim_cmd->add_option("--coef", coef_texts, "linear effect name=value");
    sim_cmd->add_option("--covariate", covariate_texts,
                        "covariate law name=normal:m,s | uniform:a,b | bernoulli:p");
    sim_cmd->add_option("--censoring", censoring_text, "none, uniform or geometric:p");
    sim_cmd->add_option("--out", sim_opts.out_dir, "output directory");
    sim_cmd->add_option("--seed", sim_opts.seed, "random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (augment_cmd->parsed()) return cmd_augment(aug_opts);
        if (fit_cmd->parsed()) return cmd_fit(fit_opts, formula_text, link_text);
        if (tree_cmd->parsed())
            return cmd_tree(tree_opts, criterion_text, grid_text, folds, candidates_text);
        if (diag_cmd->parsed()) return cmd_diagnose(diag_opts, model_path, K, residual_vs);
        if (sim_cmd->parsed())
            return cmd_simulate(sim_opts, sim_n, sim_k, baseline_text, coef_texts,
                                covariate_texts, censoring_text);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
