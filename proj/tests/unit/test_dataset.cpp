#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "declinecast/dataset.hpp"
#include "declinecast/errors.hpp"
#include "test_util.hpp"

using namespace declinecast;

namespace {

std::string header(std::size_t months) {
    std::string h = "Well-API,County,State";
    for (std::size_t m = 1; m <= months; ++m) h += ",Month-" + std::to_string(m);
    return h + "\n";
}

Dataset make_ds(std::size_t n, std::size_t months = 6) {
    std::vector<WellRecord> wells;
    for (std::size_t i = 0; i < n; ++i) {
        WellRecord w{"W" + std::to_string(i), i % 2 ? "Odd" : "Even", "Texas", {}};
        for (std::size_t m = 0; m < months; ++m) w.production.push_back(100.0 * (i + 1) / (m + 1));
        wells.push_back(std::move(w));
    }
    return Dataset(std::move(wells), months);
}

std::vector<std::string> ids(const Dataset& ds) {
    std::vector<std::string> out;
    for (const auto& w : ds.wells()) out.push_back(w.api_id);
    return out;
}

}  // namespace

TEST_CASE("load_csv parses the Barnett sample row") {
    std::ostringstream csv;
    csv << header(120) << "42-425-30160, Somervell, Texas, 21295";
    for (int m = 2; m < 120; ++m) csv << ", " << 20000 - 100 * m;
    csv << ", 1373\n";
    std::istringstream in(csv.str());
    const auto ds = read_csv(in, 120);
    REQUIRE(ds.size() == 1);
    CHECK(ds.months() == 120);
    CHECK(ds[0].api_id == "42-425-30160");
    CHECK(ds[0].county == "Somervell");
    CHECK(ds[0].state == "Texas");
    CHECK(ds[0].production[0] == 21295.0);
    CHECK(ds[0].production[119] == 1373.0);
}

TEST_CASE("load_csv accepts a header-only file") {
    std::istringstream in(header(8));
    const auto ds = read_csv(in);
    CHECK(ds.empty());
    CHECK(ds.months() == 8);
}

TEST_CASE("load_csv rejects bad rows with their position") {
    SUBCASE("negative production names line and column") {
        std::istringstream in(header(5) + "A,X,T,1,2,3,4,5\nB,X,T,1,-5,3,4,5\n");
        try {
            read_csv(in);
            FAIL("expected DataError");
        } catch (const DataError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("line 3") != std::string::npos);
            CHECK(msg.find("Month-2") != std::string::npos);
        }
    }
    SUBCASE("non-numeric") {
        std::istringstream in(header(5) + "A,X,T,1,2,abc,4,5\n");
        CHECK_THROWS_AS(read_csv(in), DataError);
    }
    SUBCASE("row length mismatch") {
        std::istringstream in(header(5) + "A,X,T,1,2,3,4\n");
        CHECK_THROWS_AS(read_csv(in), DataError);
    }
    SUBCASE("duplicate api id") {
        std::istringstream in(header(5) + "A,X,T,1,2,3,4,5\nA,X,T,1,2,3,4,5\n");
        CHECK_THROWS_AS(read_csv(in), DataError);
    }
    SUBCASE("duplicate header column") {
        std::istringstream in("Well-API,County,State,Month-1,Month-1,Month-3,Month-4,Month-5\n");
        CHECK_THROWS_WITH_AS(read_csv(in), doctest::Contains("duplicate"), DataError);
    }
    SUBCASE("missing header column") {
        std::istringstream in("Well-API,State,Month-1,Month-2,Month-3,Month-4,Month-5\n");
        CHECK_THROWS_AS(read_csv(in), DataError);
    }
    SUBCASE("too few months") {
        std::istringstream in(header(4));
        CHECK_THROWS_AS(read_csv(in), DataError);
    }
    SUBCASE("expected month count") {
        std::istringstream in(header(6));
        CHECK_THROWS_AS(read_csv(in, 5), DataError);
    }
}

TEST_CASE("zero production months are valid") {
    std::istringstream in(header(5) + "A,X,T,0,0,3,0,5\n");
    CHECK(read_csv(in).size() == 1);
}

TEST_CASE("write_csv then read_csv reproduces the values") {
    Rng rng(11);
    auto cfg = testutil::two_regime(7, 12, 0.3);
    const auto ds = synth_generate(cfg, rng).data;
    std::stringstream buf;
    write_csv(buf, ds);
    const auto back = read_csv(buf);
    REQUIRE(back.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(back[i].api_id == ds[i].api_id);
        CHECK(back[i].county == ds[i].county);
        CHECK(back[i].production == ds[i].production);
    }
    CHECK(back.content_hash() == ds.content_hash());
}

TEST_CASE("county_counts") {
    CHECK(county_counts(Dataset({}, 5)).empty());
    const auto counts = county_counts(make_ds(7));
    CHECK(counts.at("Even") == 4);
    CHECK(counts.at("Odd") == 3);
}

TEST_CASE("shuffle_split sizes and determinism") {
    const auto ds = make_ds(100);
    Rng a(7), b(7);
    const auto p = shuffle_split(ds, 0.75, a);
    const auto q = shuffle_split(ds, 0.75, b);
    CHECK(p.first.size() == 75);
    CHECK(p.second.size() == 25);
    CHECK(ids(p.first) == ids(q.first));
    CHECK(ids(p.second) == ids(q.second));

    auto all = ids(p.first);
    const auto rest = ids(p.second);
    all.insert(all.end(), rest.begin(), rest.end());
    std::set<std::string> uniq(all.begin(), all.end());
    CHECK(uniq.size() == 100);

    Rng c(3);
    const auto tiny = shuffle_split(make_ds(4), 0.75, c);
    CHECK(tiny.first.size() == 3);
    CHECK(tiny.second.size() == 1);

    Rng d(1);
    CHECK_THROWS_AS(shuffle_split(Dataset({}, 6), 0.75, d), DataError);
}

TEST_CASE("split partitions hold for every size") {
    for (std::size_t n = 2; n < 60; ++n) {
        Rng rng(n);
        const auto p = shuffle_split(make_ds(n), 0.75, rng);
        CHECK(p.first.size() + p.second.size() == n);
        CHECK(p.first.size() >= 1);
        CHECK(p.second.size() >= 1);
        const auto train_ids = ids(p.first);
        std::set<std::string> a(train_ids.begin(), train_ids.end());
        for (const auto& id : ids(p.second)) CHECK(a.count(id) == 0);
    }
    CHECK(train_size(1372, 0.75) == 1029);
    CHECK(train_size(10, 0.7) == 7);
}

TEST_CASE("validation_split sizes") {
    Rng rng(5);
    auto p = validation_split(make_ds(80), 0.10, rng);
    CHECK(p.first.size() == 72);
    CHECK(p.second.size() == 8);
    p = validation_split(make_ds(5), 0.10, rng);
    CHECK(p.first.size() == 4);
    CHECK(p.second.size() == 1);
    CHECK_THROWS_AS(validation_split(make_ds(1), 0.10, rng), DataError);
}

TEST_CASE("window slices input and label") {
    WellRecord w{"A", "X", "T", {10, 9, 8, 7, 6}};
    const auto p = window(w, 2);
    CHECK(p.input == std::vector<double>{10, 9});
    CHECK(p.label == std::vector<double>{8, 7, 6});

    WellRecord long_well{"B", "X", "T", std::vector<double>(120, 1.0)};
    CHECK(window(long_well, 8).label.size() == 112);
    CHECK_THROWS_AS(window(long_well, 120), ConfigError);
    CHECK_THROWS_AS(window(long_well, 0), ConfigError);

    for (std::size_t n = 1; n < 5; ++n) {
        auto wp = window(w, n);
        wp.input.insert(wp.input.end(), wp.label.begin(), wp.label.end());
        CHECK(wp.input == w.production);
    }
}

TEST_CASE("scaler") {
    std::vector<WellRecord> wells{{"A", "X", "T", {87601, 500, 10, 3, 1}}};
    const Dataset ds(wells, 5);
    const auto s = fit_scaler(ds);
    CHECK(s.scale == 87601.0);
    CHECK(s.apply(std::vector<double>{87601.0})[0] == 1.0);

    Rng rng(9);
    std::uniform_real_distribution<double> u(0.0, 1e6);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v(17);
        for (auto& x : v) x = u(rng);
        const auto back = s.invert(s.apply(v));
        for (std::size_t i = 0; i < v.size(); ++i) CHECK(testutil::rel_err(back[i], v[i]) <= 1e-12);
    }

    const Dataset zeros({{"Z", "X", "T", {0, 0, 0, 0, 0}}}, 5);
    CHECK_THROWS_AS(fit_scaler(zeros), DataError);
}

TEST_CASE("synth_generate") {
    SUBCASE("noise-free backbone matches the decline model") {
        SynthConfig cfg;
        cfg.counties.push_back({"C", 1000, 1000, 1, 1, 0.1, 0.1});
        cfg.wells_per_county = 3;
        cfg.months = 12;
        Rng rng(1);
        const auto res = synth_generate(cfg, rng);
        for (const auto& w : res.data.wells()) CHECK(w.production[10] == doctest::Approx(500.0).epsilon(1e-12));
    }
    SUBCASE("truth side channel reproduces every month") {
        auto cfg = testutil::two_regime(5, 30, 0.0);
        Rng rng(4);
        const auto res = synth_generate(cfg, rng);
        REQUIRE(res.truth.size() == res.data.size());
        for (std::size_t i = 0; i < res.data.size(); ++i)
            for (std::size_t t = 0; t < 30; ++t)
                CHECK(testutil::rel_err(res.data[i].production[t], arps_rate(res.truth[i].params, double(t))) <= 1e-12);
        std::stringstream buf;
        write_truth_csv(buf, res.truth);
        const auto back = read_truth_csv(buf);
        REQUIRE(back.size() == res.truth.size());
        CHECK(back[3].params == res.truth[3].params);
    }
    SUBCASE("empty and deterministic") {
        auto cfg = testutil::two_regime(0);
        Rng rng(2);
        CHECK(synth_generate(cfg, rng).data.empty());
        cfg.wells_per_county = 4;
        Rng a(8), b(8);
        CHECK(synth_generate(cfg, a).data.content_hash() == synth_generate(cfg, b).data.content_hash());
    }
    SUBCASE("invalid ranges") {
        SynthConfig cfg;
        cfg.counties.push_back({"C", 1000, 1000, 1, 2.5, 0.1, 0.1});
        Rng rng(1);
        CHECK_THROWS_AS(synth_generate(cfg, rng), ConfigError);
        cfg.counties[0].b_max = 1.0;
        cfg.counties[0].qi_min = -1.0;
        CHECK_THROWS_AS(synth_generate(cfg, rng), ConfigError);
    }
}
