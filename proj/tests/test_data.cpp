#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "dhaz/data.hpp"
#include "support/oracles.hpp"

using namespace dhaz;
using Catch::Approx;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

// (T,D,x) = (2,1,1.0), (1,0,0.0), (3,1,-1.0), horizon 3
Dataset toy3() {
    CovariateSchema schema{{"x", CovKind::numeric, {}}};
    std::vector<SurvivalRecord> recs{
        {1, 2, 1, {1.0}},
        {2, 1, 0, {0.0}},
        {3, 3, 1, {-1.0}},
    };
    return Dataset(std::move(recs), 3, schema);
}

} // namespace

TEST_CASE("ingest parses a plain csv") {
    auto path = write_temp("dhaz_toy3.csv", "time,status,x\n2,1,1.0\n1,0,0.0\n3,1,-1.0\n");
    CovariateSchema schema{{"x", CovKind::numeric, {}}};
    IngestReport report;
    Dataset ds = ingest_csv(path, "time", "status", schema, &report);
    REQUIRE(ds.size() == 3);
    REQUIRE(ds.horizon_k() == 3);
    REQUIRE(report.dropped_rows == 0);
    REQUIRE(ds.records()[0].subject_id == 1);
    REQUIRE(ds.records()[0].observed_time == 2);
    REQUIRE(ds.records()[0].status == 1);
    REQUIRE(ds.records()[0].covariates[0] == 1.0);
    REQUIRE(ds.records()[2].observed_time == 3);
    REQUIRE(ds.records()[2].covariates[0] == -1.0);
}

TEST_CASE("ingest drops rows with missing values and counts them") {
    auto path = write_temp("dhaz_missing.csv",
                           "time,status,x\n2,1,1.0\n1,0,NA\n3,1,\n1,0,0.5\n");
    CovariateSchema schema{{"x", CovKind::numeric, {}}};
    IngestReport report;
    Dataset ds = ingest_csv(path, "time", "status", schema, &report);
    REQUIRE(ds.size() == 2);
    REQUIRE(report.dropped_rows == 2);
}

TEST_CASE("ingest rejects degenerate input") {
    auto empty = write_temp("dhaz_empty.csv", "time,status,x\n");
    CovariateSchema schema{{"x", CovKind::numeric, {}}};
    REQUIRE_THROWS_WITH(ingest_csv(empty, "time", "status", schema), "empty dataset");

    auto bad_time = write_temp("dhaz_badtime.csv", "time,status,x\n0,1,1.0\n2,0,0.0\n");
    REQUIRE_THROWS_AS(ingest_csv(bad_time, "time", "status", schema), std::invalid_argument);
    auto frac_time = write_temp("dhaz_fractime.csv", "time,status,x\n1.5,1,1.0\n2,0,0.0\n");
    REQUIRE_THROWS_AS(ingest_csv(frac_time, "time", "status", schema), std::invalid_argument);

    REQUIRE_THROWS_AS(ingest_csv(empty, "nope", "status", schema), std::invalid_argument);

    auto bad_status = write_temp("dhaz_badstatus.csv", "time,status,x\n1,a,1\n2,b,0\n1,c,2\n");
    REQUIRE_THROWS_AS(ingest_csv(bad_status, "time", "status", schema), std::invalid_argument);
}

TEST_CASE("ingest accepts labeled status with an event label") {
    auto path = write_temp("dhaz_labeled.csv",
                           "time,status,ui\n2,yes,no\n1,no,yes\n3,yes,yes\n");
    CovariateSchema schema{{"ui", CovKind::binary_factor, {"no", "yes"}}};
    Dataset ds = ingest_csv(path, "time", "status", schema, nullptr, "yes");
    REQUIRE(ds.records()[0].status == 1);
    REQUIRE(ds.records()[1].status == 0);
    REQUIRE(ds.records()[1].covariates[0] == 1.0);
    // the same file without the label is rejected
    REQUIRE_THROWS_AS(ingest_csv(path, "time", "status", schema), std::invalid_argument);
}

TEST_CASE("schema inference classifies columns") {
    auto path = write_temp("dhaz_infer.csv",
                           "time,status,age,ui,grp\n1,0,41,no,a\n2,1,30,yes,b\n2,1,26,no,c\n");
    CsvTable table = read_csv(path);
    CovariateSchema schema = infer_schema(table, "time", "status");
    REQUIRE(schema.size() == 3);
    REQUIRE(schema[0].name == "age");
    REQUIRE(schema[0].kind == CovKind::numeric);
    REQUIRE(schema[1].kind == CovKind::binary_factor);
    REQUIRE(schema[1].levels == std::vector<std::string>{"no", "yes"});
    REQUIRE(schema[2].kind == CovKind::multi_factor);
}

TEST_CASE("censoring rate") {
    REQUIRE(censoring_rate(toy3()) == Approx(1.0 / 3.0));

    CovariateSchema schema{{"x", CovKind::numeric, {}}};
    std::vector<SurvivalRecord> recs{{1, 1, 1, {0.0}}, {2, 2, 1, {0.0}}};
    Dataset all_events(std::move(recs), 2, schema);
    REQUIRE(censoring_rate(all_events) == 0.0);
}

TEST_CASE("recode of the last period") {
    Dataset ds = toy3();
    Dataset rec = recode_last_period(ds);
    REQUIRE(rec.records()[0].observed_time == 2); // unchanged, below horizon
    REQUIRE(rec.records()[0].status == 1);
    REQUIRE(rec.records()[2].observed_time == 2); // (3,1) -> (2,0)
    REQUIRE(rec.records()[2].status == 0);

    // censored at the horizon stays put
    CovariateSchema schema{{"x", CovKind::numeric, {}}};
    std::vector<SurvivalRecord> recs{{1, 3, 0, {0.0}}, {2, 1, 1, {0.0}}};
    Dataset at_k(std::move(recs), 3, schema);
    Dataset at_k_rec = recode_last_period(at_k);
    REQUIRE(at_k_rec.records()[0].observed_time == 3);
    REQUIRE(at_k_rec.records()[0].status == 0);
}

TEST_CASE("recode preserves the likelihood of any hazard table") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 100; ++rep) {
        Dataset ds = oracles::random_dataset(rng);
        auto lam = oracles::random_hazard_table(rng, ds.horizon_k());
        auto fn = [&](int t, const std::vector<double>&) {
            return lam[static_cast<std::size_t>(t - 1)];
        };
        double before = log_likelihood(augment(ds), fn);
        double after = log_likelihood(augment(recode_last_period(ds)), fn);
        REQUIRE(before == Approx(after).margin(1e-12));
    }
}

TEST_CASE("augmentation expands person-period rows") {
    Dataset ds = recode_last_period(toy3());
    AugmentedDataset aug = augment(ds);
    REQUIRE(aug.n_rows() == 5); // 2 + 1 + 2
    // subject 1: y = (0,1)
    REQUIRE(aug.rows()[0].time_interval == 1);
    REQUIRE(aug.rows()[0].response == 0);
    REQUIRE(aug.rows()[1].time_interval == 2);
    REQUIRE(aug.rows()[1].response == 1);
    // subject 2: y = (0)
    REQUIRE(aug.rows()[2].response == 0);
    // subject 3 (recoded to censored): y = (0,0)
    REQUIRE(aug.rows()[3].response == 0);
    REQUIRE(aug.rows()[4].response == 0);
    for (const auto& row : aug.rows()) REQUIRE(row.covariates.size() == 1);
}

TEST_CASE("augmentation invariants on random datasets") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        Dataset ds = oracles::random_dataset(rng);
        AugmentedDataset aug = augment(ds);
        std::size_t expected = 0;
        long events = 0;
        for (const auto& r : ds.records()) {
            expected += static_cast<std::size_t>(r.observed_time);
            events += r.status;
        }
        REQUIRE(aug.n_rows() == expected);
        long ones = 0;
        for (std::size_t i = 0; i < aug.n_rows(); ++i) {
            const auto& row = aug.rows()[i];
            if (row.response == 1) {
                ++ones;
                // y=1 only on the subject's final row
                bool last = i + 1 == aug.n_rows() ||
                            aug.rows()[i + 1].subject_id != row.subject_id;
                REQUIRE(last);
            }
        }
        REQUIRE(ones == events);
    }
}

TEST_CASE("hazard to survival") {
    SurvivalCurve s = hazard_to_survival(HazardCurve{{0.2, 0.5}});
    REQUIRE(s.values[0] == Approx(0.8));
    REQUIRE(s.values[1] == Approx(0.4));

    SurvivalCurve flat = hazard_to_survival(HazardCurve{{0.0, 0.0, 0.0}});
    for (double v : flat.values) REQUIRE(v == 1.0);

    SurvivalCurve absorbing = hazard_to_survival(HazardCurve{{0.3, 1.0, 0.2}});
    REQUIRE(absorbing.values[1] == 0.0);
    REQUIRE(absorbing.values[2] == 0.0);

    REQUIRE_THROWS_AS(hazard_to_survival(HazardCurve{{1.2}}), std::invalid_argument);
}

TEST_CASE("survival curves never increase") {
    std::mt19937_64 rng(3);
    auto u01 = [&]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (int rep = 0; rep < 200; ++rep) {
        HazardCurve h;
        int len = 1 + static_cast<int>(rng() % 10);
        for (int t = 0; t < len; ++t) h.values.push_back(u01());
        SurvivalCurve s = hazard_to_survival(h);
        double prev = 1.0;
        for (double v : s.values) {
            REQUIRE(v <= prev + 1e-15);
            prev = v;
        }
    }
}

TEST_CASE("log-likelihood on the toy dataset") {
    AugmentedDataset aug = augment(recode_last_period(toy3()));
    double ll = log_likelihood(aug, [](int, const std::vector<double>&) { return 0.5; });
    REQUIRE(ll == Approx(5.0 * std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("saturated hazards approach zero log-likelihood as the clip vanishes") {
    AugmentedDataset aug = augment(recode_last_period(toy3()));
    for (double eps : {1e-3, 1e-6, 1e-9}) {
        auto fn = [&](int t, const std::vector<double>& x) {
            // match the observed outcome of every row, pulled off 0/1 by eps
            for (const auto& row : aug.rows())
                if (row.time_interval == t && row.covariates == x)
                    return row.response == 1 ? 1.0 - eps : eps;
            return 0.5;
        };
        double ll = log_likelihood(aug, fn);
        REQUIRE(ll < 0.0);
        REQUIRE(ll > -10.0 * static_cast<double>(aug.n_rows()) * eps);
    }
}

TEST_CASE("exact contradictions flag as negative infinity") {
    AugmentedDataset aug = augment(toy3());
    double ll0 = log_likelihood(aug, [](int, const std::vector<double>&) { return 0.0; });
    REQUIRE(std::isinf(ll0));
    REQUIRE(ll0 < 0);
    double ll1 = log_likelihood(aug, [](int, const std::vector<double>&) { return 1.0; });
    REQUIRE(std::isinf(ll1));
}

TEST_CASE("augmented log-likelihood equals the subject-level product form") {
    // fixed table on the toy data
    AugmentedDataset aug = augment(recode_last_period(toy3()));
    auto quarter = [](int t, const std::vector<double>&) { return t / 4.0; };
    double via_rows = log_likelihood(aug, quarter);
    double via_subjects = oracles::subject_loglik(recode_last_period(toy3()), quarter);
    REQUIRE(via_rows == Approx(via_subjects).margin(1e-12));

    // random datasets and tables
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 200; ++rep) {
        Dataset ds = recode_last_period(oracles::random_dataset(rng));
        auto lam = oracles::random_hazard_table(rng, ds.horizon_k());
        auto fn = [&](int t, const std::vector<double>&) {
            return lam[static_cast<std::size_t>(t - 1)];
        };
        REQUIRE(log_likelihood(augment(ds), fn) ==
                Approx(oracles::subject_loglik(ds, fn)).margin(1e-12));
    }
}

TEST_CASE("augmented csv export uses the long-format layout") {
    auto dir = std::filesystem::temp_directory_path();
    auto path = (dir / "dhaz_aug.csv").string();
    write_augmented_csv(path, augment(recode_last_period(toy3())));
    CsvTable table = read_csv(path);
    REQUIRE(table.header == std::vector<std::string>{"obj", "timeInt", "y", "x"});
    REQUIRE(table.rows.size() == 5);
    REQUIRE(table.rows[1] == std::vector<std::string>{"1", "2", "1", "1"});
}
