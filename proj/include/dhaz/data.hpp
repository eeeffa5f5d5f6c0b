#ifndef DHAZ_DATA_HPP
#define DHAZ_DATA_HPP

// Core data model for right-censored discrete time-to-event data:
// subject-level records, the person-period (long format) expansion,
// hazard/survival transforms and the binary-response log-likelihood.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dhaz/csv.hpp"

namespace dhaz {

enum class CovKind { numeric, binary_factor, multi_factor };

struct Covariate {
    std::string name;
    CovKind kind = CovKind::numeric;
    // Factor levels, sorted; the first level is the reference when encoding.
    std::vector<std::string> levels;

    bool is_factor() const { return kind != CovKind::numeric; }
};

using CovariateSchema = std::vector<Covariate>;

inline int schema_column(const CovariateSchema& schema, const std::string& name) {
    for (std::size_t j = 0; j < schema.size(); ++j) {
        if (schema[j].name == name) return static_cast<int>(j);
    }
    return -1;
}

// One subject: observed discrete time, event indicator, covariate vector.
// Factor covariates are stored as level indices into the schema's level set.
struct SurvivalRecord {
    long subject_id = 0;
    int observed_time = 0; // 1..k
    int status = 0;        // 1 = event observed, 0 = right censored
    std::vector<double> covariates;
};

class Dataset {
public:
    Dataset(std::vector<SurvivalRecord> records, int horizon_k, CovariateSchema schema)
        : records_(std::move(records)), horizon_k_(horizon_k), schema_(std::move(schema)) {
        validate();
    }

    const std::vector<SurvivalRecord>& records() const { return records_; }
    int horizon_k() const { return horizon_k_; }
    const CovariateSchema& schema() const { return schema_; }
    std::size_t size() const { return records_.size(); }

    Dataset with_horizon(int k) const {
        return Dataset(records_, k, schema_);
    }

private:
    void validate() const {
        if (records_.empty()) throw std::invalid_argument("empty dataset");
        if (horizon_k_ < 2) throw std::invalid_argument("horizon k must be >= 2");
        bool below_horizon = false;
        for (const auto& r : records_) {
            if (r.observed_time < 1 || r.observed_time > horizon_k_)
                throw std::invalid_argument("observed time outside 1..k");
            if (r.status != 0 && r.status != 1)
                throw std::invalid_argument("status must be 0 or 1");
            if (r.covariates.size() != schema_.size())
                throw std::invalid_argument("record does not conform to covariate schema");
            for (std::size_t j = 0; j < schema_.size(); ++j) {
                if (schema_[j].is_factor()) {
                    double v = r.covariates[j];
                    int lev = static_cast<int>(v);
                    if (v != lev || lev < 0 || lev >= static_cast<int>(schema_[j].levels.size()))
                        throw std::invalid_argument("factor level out of range for " + schema_[j].name);
                }
            }
            if (r.observed_time < horizon_k_) below_horizon = true;
        }
        if (!below_horizon)
            throw std::invalid_argument("degenerate dataset: every observed time equals the horizon");
    }

    std::vector<SurvivalRecord> records_;
    int horizon_k_;
    CovariateSchema schema_;
};

// ---------------------------------------------------------------------------
// Ingestion

struct IngestReport {
    long dropped_rows = 0;
};

namespace detail {

inline bool is_missing(const std::string& s) {
    return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan";
}

inline bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

} // namespace detail

// Inspect a table and derive a schema for every column except the time and
// status columns: numeric when all non-missing cells parse as numbers,
// otherwise a factor with lexicographically sorted levels.
inline CovariateSchema infer_schema(const CsvTable& table, const std::string& time_column,
                                    const std::string& status_column) {
    CovariateSchema schema;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
        const std::string& name = table.header[j];
        if (name == time_column || name == status_column) continue;
        bool numeric = true;
        std::set<std::string> levels;
        for (const auto& row : table.rows) {
            const std::string& cell = row[j];
            if (detail::is_missing(cell)) continue;
            double v;
            if (!detail::parse_double(cell, v)) numeric = false;
            levels.insert(cell);
        }
        Covariate cov;
        cov.name = name;
        if (numeric) {
            cov.kind = CovKind::numeric;
        } else {
            cov.kind = levels.size() <= 2 ? CovKind::binary_factor : CovKind::multi_factor;
            cov.levels.assign(levels.begin(), levels.end());
        }
        schema.push_back(std::move(cov));
    }
    return schema;
}

// Build a dataset from a parsed table. Rows with missing values are dropped
// and counted; subject ids are assigned sequentially in row order. The
// horizon defaults to the maximum observed time.
inline Dataset ingest_table(const CsvTable& table, const std::string& time_column,
                            const std::string& status_column, const CovariateSchema& schema,
                            IngestReport* report = nullptr,
                            const std::string& event_label = "") {
    int tcol = table.column(time_column);
    if (tcol < 0) throw std::invalid_argument("unknown column: " + time_column);
    int scol = table.column(status_column);
    if (scol < 0) throw std::invalid_argument("unknown column: " + status_column);
    std::vector<int> cov_cols;
    for (const auto& cov : schema) {
        int c = table.column(cov.name);
        if (c < 0) throw std::invalid_argument("unknown column: " + cov.name);
        cov_cols.push_back(c);
    }

    // Without an explicit event label the status column must be coded 0/1.
    std::set<std::string> status_levels;
    for (const auto& row : table.rows) {
        if (!detail::is_missing(row[scol])) status_levels.insert(row[scol]);
    }
    if (status_levels.size() > 2)
        throw std::invalid_argument("status column has more than two levels");
    if (event_label.empty()) {
        for (const auto& s : status_levels) {
            if (s != "0" && s != "1")
                throw std::invalid_argument(
                    "status column is not coded 0/1; pass an event label for \"" + s + "\"-style coding");
        }
    }

    std::vector<SurvivalRecord> records;
    long dropped = 0;
    long next_id = 1;
    for (const auto& row : table.rows) {
        bool missing = detail::is_missing(row[tcol]) || detail::is_missing(row[scol]);
        for (int c : cov_cols) missing = missing || detail::is_missing(row[c]);
        if (missing) {
            ++dropped;
            continue;
        }
        SurvivalRecord rec;
        rec.subject_id = next_id++;
        double tv;
        if (!detail::parse_double(row[tcol], tv) || tv != std::floor(tv) || tv < 1)
            throw std::invalid_argument("non-integer or <1 time value: " + row[tcol]);
        rec.observed_time = static_cast<int>(tv);
        if (event_label.empty()) {
            rec.status = row[scol] == "1" ? 1 : 0;
        } else {
            rec.status = row[scol] == event_label ? 1 : 0;
        }
        for (std::size_t j = 0; j < schema.size(); ++j) {
            const std::string& cell = row[cov_cols[j]];
            if (schema[j].is_factor()) {
                auto it = std::find(schema[j].levels.begin(), schema[j].levels.end(), cell);
                if (it == schema[j].levels.end())
                    throw std::invalid_argument("unknown factor level \"" + cell + "\" for " +
                                                schema[j].name);
                rec.covariates.push_back(static_cast<double>(it - schema[j].levels.begin()));
            } else {
                double v;
                if (!detail::parse_double(cell, v))
                    throw std::invalid_argument("non-numeric value \"" + cell + "\" in numeric column " +
                                                schema[j].name);
                rec.covariates.push_back(v);
            }
        }
        records.push_back(std::move(rec));
    }
    if (report) report->dropped_rows = dropped;
    if (records.empty()) throw std::invalid_argument("empty dataset");
    int k = 0;
    for (const auto& r : records) k = std::max(k, r.observed_time);
    return Dataset(std::move(records), k, schema);
}

inline Dataset ingest_csv(const std::string& path, const std::string& time_column,
                          const std::string& status_column, const CovariateSchema& schema,
                          IngestReport* report = nullptr, const std::string& event_label = "") {
    return ingest_table(read_csv(path), time_column, status_column, schema, report, event_label);
}

// ---------------------------------------------------------------------------
// Subject-level operations

inline double censoring_rate(const Dataset& ds) {
    long censored = 0;
    for (const auto& r : ds.records())
        if (r.status == 0) ++censored;
    return static_cast<double>(censored) / static_cast<double>(ds.size());
}

// Map (T=k, status=1) to (T=k-1, status=0). The hazard at the horizon is 1
// by construction, so the likelihood is unchanged; censored records at k are
// left as they are.
inline Dataset recode_last_period(const Dataset& ds) {
    int k = ds.horizon_k();
    std::vector<SurvivalRecord> recs = ds.records();
    for (auto& r : recs) {
        if (r.observed_time == k && r.status == 1) {
            r.observed_time = k - 1;
            r.status = 0;
        }
    }
    return Dataset(std::move(recs), k, ds.schema());
}

// ---------------------------------------------------------------------------
// Person-period expansion

struct AugmentedRow {
    long subject_id = 0;
    int time_interval = 0; // 1..T_i
    int response = 0;      // y
    std::vector<double> covariates;
};

class AugmentedDataset {
public:
    AugmentedDataset(std::vector<AugmentedRow> rows, CovariateSchema schema, int horizon_k,
                     std::size_t n_subjects)
        : rows_(std::move(rows)), schema_(std::move(schema)), horizon_k_(horizon_k),
          n_subjects_(n_subjects) {}

    const std::vector<AugmentedRow>& rows() const { return rows_; }
    std::size_t n_rows() const { return rows_.size(); }
    const CovariateSchema& schema() const { return schema_; }
    int horizon_k() const { return horizon_k_; }
    std::size_t n_subjects() const { return n_subjects_; }

private:
    std::vector<AugmentedRow> rows_;
    CovariateSchema schema_;
    int horizon_k_;
    std::size_t n_subjects_;
};

// One binary row per subject and at-risk period: for subject i, rows t=1..T_i
// with y=1 only in the last row and only when the event was observed.
inline AugmentedDataset augment(const Dataset& ds) {
    std::vector<AugmentedRow> rows;
    std::size_t total = 0;
    for (const auto& r : ds.records()) total += static_cast<std::size_t>(r.observed_time);
    rows.reserve(total);
    for (const auto& r : ds.records()) {
        for (int t = 1; t <= r.observed_time; ++t) {
            AugmentedRow row;
            row.subject_id = r.subject_id;
            row.time_interval = t;
            row.response = (r.status == 1 && t == r.observed_time) ? 1 : 0;
            row.covariates = r.covariates;
            rows.push_back(std::move(row));
        }
    }
    return AugmentedDataset(std::move(rows), ds.schema(), ds.horizon_k(), ds.size());
}

// Long-format export with the obj,timeInt,y,<covariates...> column layout.
// Covariates are data, not derived output, and keep full precision.
inline void write_augmented_csv(const std::string& path, const AugmentedDataset& aug) {
    std::vector<std::string> header = {"obj", "timeInt", "y"};
    for (const auto& cov : aug.schema()) header.push_back(cov.name);
    std::vector<std::vector<std::string>> out;
    out.reserve(aug.n_rows());
    char buf[32];
    for (const auto& row : aug.rows()) {
        std::vector<std::string> cells;
        cells.push_back(std::to_string(row.subject_id));
        cells.push_back(std::to_string(row.time_interval));
        cells.push_back(std::to_string(row.response));
        for (std::size_t j = 0; j < aug.schema().size(); ++j) {
            const auto& cov = aug.schema()[j];
            if (cov.is_factor()) {
                cells.push_back(cov.levels[static_cast<int>(row.covariates[j])]);
            } else {
                std::snprintf(buf, sizeof(buf), "%.17g", row.covariates[j]);
                cells.push_back(buf);
            }
        }
        out.push_back(std::move(cells));
    }
    write_csv(path, header, out);
}

// ---------------------------------------------------------------------------
// Hazard and survival curves

struct HazardCurve {
    std::vector<double> values; // lambda(1..t_max), each in [0,1]
};

struct SurvivalCurve {
    std::vector<double> values; // S(1..t_max)
};

inline SurvivalCurve hazard_to_survival(const HazardCurve& h) {
    SurvivalCurve s;
    s.values.reserve(h.values.size());
    double prod = 1.0;
    for (double lam : h.values) {
        if (lam < 0.0 || lam > 1.0) throw std::invalid_argument("hazard outside [0,1]");
        prod *= (1.0 - lam);
        s.values.push_back(prod);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Binary-response log-likelihood

// One-sided clip applied to the log argument; keeps saturated fits finite
// while an exact 0/1 hazard contradicting the response yields -inf.
inline constexpr double kHazardClip = 1e-10;

template <typename HazardFn>
double log_likelihood(const AugmentedDataset& aug, HazardFn&& hazard_fn) {
    double ll = 0.0;
    for (const auto& row : aug.rows()) {
        double lam = hazard_fn(row.time_interval, row.covariates);
        if (row.response == 1) {
            if (lam == 0.0) return -std::numeric_limits<double>::infinity();
            ll += std::log(std::max(lam, kHazardClip));
        } else {
            if (lam == 1.0) return -std::numeric_limits<double>::infinity();
            ll += std::log(std::max(1.0 - lam, kHazardClip));
        }
    }
    return ll;
}

} // namespace dhaz

#endif
