#ifndef DHAZ_SIMULATE_HPP
#define DHAZ_SIMULATE_HPP

// Seeded generator of censored discrete time-to-event data from a known
// hazard law. Every subject draws from its own substream, so output is
// byte-identical for a given seed regardless of generation order. All
// variate transforms are fixed here rather than delegated to <random>
// distributions, whose output is implementation-defined.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "dhaz/data.hpp"
#include "dhaz/irls.hpp"

namespace dhaz {

struct CovariateLaw {
    enum class Kind { normal, uniform, bernoulli };
    std::string name;
    Kind kind = Kind::normal;
    double a = 0.0; // normal: mean; uniform: lower; bernoulli: P(level 1)
    double b = 1.0; // normal: sd; uniform: upper
    std::vector<std::string> levels{"0", "1"}; // bernoulli factor levels
};

enum class CensoringLaw { none, uniform_over_horizon, geometric };

struct GeneratorSpec {
    long n_subjects = 0;
    int horizon_k = 2;
    std::vector<double> baseline; // log-odds alpha_1..alpha_{k-1}
    std::vector<std::pair<std::string, double>> linear_effects;
    std::vector<std::pair<std::string, std::function<double(double)>>> smooth_effects;
    std::vector<CovariateLaw> covariates;
    CensoringLaw censoring = CensoringLaw::none;
    double geometric_p = 0.1;
    std::uint64_t seed = 1;

    void validate() const {
        if (n_subjects < 1) throw std::invalid_argument("need at least one subject");
        if (horizon_k < 2) throw std::invalid_argument("horizon must be >= 2");
        if (baseline.size() != static_cast<std::size_t>(horizon_k - 1))
            throw std::invalid_argument("baseline needs k-1 values");
        if (censoring == CensoringLaw::geometric &&
            (geometric_p <= 0.0 || geometric_p >= 1.0))
            throw std::invalid_argument("geometric censoring needs p in (0,1)");
    }
};

namespace detail {

inline std::uint64_t sim_splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

struct SubjectRng {
    std::mt19937_64 gen;
    explicit SubjectRng(std::uint64_t seed, std::uint64_t subject)
        : gen(sim_splitmix64(sim_splitmix64(seed) ^ (subject + 1))) {}

    double u01() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
    double normal(double mean, double sd) {
        double u1 = 1.0 - u01(); // (0,1]
        double u2 = u01();
        return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
};

} // namespace detail

inline CovariateSchema generator_schema(const GeneratorSpec& spec) {
    CovariateSchema schema;
    for (const auto& law : spec.covariates) {
        Covariate cov;
        cov.name = law.name;
        if (law.kind == CovariateLaw::Kind::bernoulli) {
            cov.kind = CovKind::binary_factor;
            cov.levels = law.levels;
        } else {
            cov.kind = CovKind::numeric;
        }
        schema.push_back(cov);
    }
    return schema;
}

inline Dataset simulate(const GeneratorSpec& spec) {
    spec.validate();
    CovariateSchema schema = generator_schema(spec);

    std::vector<SurvivalRecord> records;
    records.reserve(static_cast<std::size_t>(spec.n_subjects));
    for (long i = 0; i < spec.n_subjects; ++i) {
        detail::SubjectRng rng(spec.seed, static_cast<std::uint64_t>(i));
        SurvivalRecord rec;
        rec.subject_id = i + 1;

        for (const auto& law : spec.covariates) {
            switch (law.kind) {
            case CovariateLaw::Kind::normal:
                rec.covariates.push_back(rng.normal(law.a, law.b));
                break;
            case CovariateLaw::Kind::uniform:
                rec.covariates.push_back(law.a + (law.b - law.a) * rng.u01());
                break;
            case CovariateLaw::Kind::bernoulli:
                rec.covariates.push_back(rng.u01() < law.a ? 1.0 : 0.0);
                break;
            }
        }

        double eta_x = 0.0;
        for (const auto& [name, coef] : spec.linear_effects) {
            int col = schema_column(schema, name);
            if (col < 0) throw std::invalid_argument("effect on unknown covariate: " + name);
            eta_x += coef * rec.covariates[static_cast<std::size_t>(col)];
        }
        for (const auto& [name, fn] : spec.smooth_effects) {
            int col = schema_column(schema, name);
            if (col < 0) throw std::invalid_argument("effect on unknown covariate: " + name);
            eta_x += fn(rec.covariates[static_cast<std::size_t>(col)]);
        }

        int event_time = spec.horizon_k;
        for (int t = 1; t < spec.horizon_k; ++t) {
            double lam = link_inverse(Link::logit, spec.baseline[static_cast<std::size_t>(t - 1)] + eta_x);
            if (rng.u01() < lam) {
                event_time = t;
                break;
            }
        }

        int censor_time = spec.horizon_k;
        switch (spec.censoring) {
        case CensoringLaw::none:
            break;
        case CensoringLaw::uniform_over_horizon: {
            int c = 1 + static_cast<int>(rng.u01() * spec.horizon_k);
            censor_time = std::min(c, spec.horizon_k);
            break;
        }
        case CensoringLaw::geometric: {
            double u = rng.u01();
            int c = 1 + static_cast<int>(std::log1p(-u) / std::log1p(-spec.geometric_p));
            censor_time = std::min(std::max(c, 1), spec.horizon_k);
            break;
        }
        }

        // ties resolve to an observed event (censoring at the interval end)
        rec.observed_time = std::min(event_time, censor_time);
        rec.status = event_time <= censor_time ? 1 : 0;
        records.push_back(std::move(rec));
    }
    return Dataset(std::move(records), spec.horizon_k, schema);
}

// Write a simulated dataset in the short format consumed by ingestion.
inline void write_dataset_csv(const std::string& path, const Dataset& ds,
                              const std::string& time_column = "time",
                              const std::string& status_column = "status") {
    std::vector<std::string> header = {time_column, status_column};
    for (const auto& cov : ds.schema()) header.push_back(cov.name);
    std::vector<std::vector<std::string>> rows;
    rows.reserve(ds.size());
    char buf[32];
    for (const auto& rec : ds.records()) {
        std::vector<std::string> cells;
        cells.push_back(std::to_string(rec.observed_time));
        cells.push_back(std::to_string(rec.status));
        for (std::size_t j = 0; j < ds.schema().size(); ++j) {
            const auto& cov = ds.schema()[j];
            if (cov.is_factor()) {
                cells.push_back(cov.levels[static_cast<std::size_t>(rec.covariates[j])]);
            } else {
                std::snprintf(buf, sizeof(buf), "%.17g", rec.covariates[j]);
                cells.push_back(buf);
            }
        }
        rows.push_back(std::move(cells));
    }
    write_csv(path, header, rows);
}

} // namespace dhaz

#endif
