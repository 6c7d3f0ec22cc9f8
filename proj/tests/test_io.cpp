#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

#include "polymer_lab/io.hpp"

using namespace polymer_lab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "polymer_lab_io_test";
    fs::create_directories(dir);
    return dir / name;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("doubles survive a text round trip") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    io::Table t{{"a", "b"}, {}};
    for (int i = 0; i < 200; ++i) {
        t.rows.push_back({u(rng) * std::pow(10.0, i % 40 - 20), std::nextafter(1.0, 2.0) + i});
    }
    t.rows.push_back({std::numeric_limits<double>::min(), std::numeric_limits<double>::max()});
    const auto path = scratch("round.csv");
    io::write_csv(path, t);
    const auto back = io::read_csv(path);
    CHECK(back.columns == t.columns);
    CHECK(back.rows == t.rows);
    CHECK(io::format_double(0.1) == "0.1");
}

TEST_CASE("malformed CSV is rejected") {
    const auto path = scratch("bad.csv");
    write_text(path, "r,v\n0,1\n1,abc\n");
    CHECK_THROWS_AS(io::read_csv(path), io::IoError);
    write_text(path, "r,v\n0,1,2\n");
    CHECK_THROWS_AS(io::read_csv(path), io::IoError);
}

TEST_CASE("potential presets") {
    const auto a = io::load_potential("ball(1, 0)");
    CHECK(a(0.5) == doctest::Approx(std::numbers::pi * std::numbers::pi / 8.0));
    const auto b = io::load_potential("ball(0.5,0.2)");
    CHECK(b(0.1) == doctest::Approx(std::numbers::pi * std::numbers::pi / 2.0 + 0.4));
    CHECK(b.support_radius() == 0.5);
    const auto c = io::load_potential("triangle(2,1.5)");
    CHECK(c(0.75) == doctest::Approx(1.0));
    CHECK_FALSE(io::parse_preset("ball(1)").has_value());
    CHECK_THROWS_AS(io::load_potential("ball(-1,0)"), spectral::PotentialError);
}

TEST_CASE("potential files with sidecar") {
    const auto csv = scratch("well.csv");
    io::save_potential(csv, spectral::RadialPotential::triangle(1.0, 2.0));
    const auto v = io::load_potential(csv.string());
    CHECK(v.support_radius() == 2.0);
    CHECK(v(1.0) == doctest::Approx(0.5));

    const auto neg = scratch("neg.csv");
    write_text(neg, "r,v\n0,1\n0.5,-0.1\n1,0\n");
    write_text(scratch("neg.json"), R"({"R_support": 1})");
    CHECK_THROWS_AS(io::load_potential(neg.string()), spectral::PotentialError);

    const auto unsorted = scratch("unsorted.csv");
    write_text(unsorted, "r,v\n0,1\n0.7,1\n0.5,0\n");
    write_text(scratch("unsorted.json"), R"({"R_support": 1})");
    CHECK_THROWS_AS(io::load_potential(unsorted.string()), spectral::PotentialError);

    const auto lonely = scratch("lonely.csv");
    write_text(lonely, "r,v\n0,1\n1,1\n");
    fs::remove(scratch("lonely.json"));
    CHECK_THROWS_AS(io::load_potential(lonely.string()), io::IoError);
    CHECK_THROWS_AS(io::load_potential(scratch("missing.csv").string()), io::IoError);
}

TEST_CASE("ensemble files") {
    montecarlo::SamplingOptions o;
    o.record_times = {0.5, 1.0};
    const auto e = montecarlo::sample_weighted_paths(spectral::RadialPotential::ball(1.0, 0.0), 1.0, 1.0, 0.01,
                                                     1000, 12, {0.0, 0.0, 0.0}, o);
    const auto path = scratch("ensemble.bin");
    io::save_ensemble(path, e);
    CHECK(fs::file_size(path) == 8 + 4 + 8 + 8 + 8 + 8 + 8 + 8 + 4 + 2 * 8 + 1000 * 2 * 3 * 8 + 1000 * 8);
    const auto back = io::load_ensemble(path);
    CHECK(back.n_paths == e.n_paths);
    CHECK(back.T == e.T);
    CHECK(back.dt == e.dt);
    CHECK(back.seed == e.seed);
    CHECK(back.beta == e.beta);
    CHECK(back.times == e.times);
    CHECK(back.positions == e.positions);
    CHECK(back.log_weights == e.log_weights);
    CHECK(back.ess == doctest::Approx(e.ess));

    write_text(scratch("junk.bin"), "not an ensemble");
    CHECK_THROWS_AS(io::load_ensemble(scratch("junk.bin")), io::IoError);
}

TEST_CASE("report documents") {
    const auto s = spectral::summarize(spectral::RadialPotential::ball(1.0, 0.0));
    const auto j = io::to_json(s);
    CHECK(j["beta_cr"].get<double>() == doctest::Approx(1.0));
    CHECK(j["psi"].size() > 10);
    CHECK(j["psi"][0].size() == 2);

    heatflow::ConvergenceTable t{"T", {{25.0, 0.3}, {100.0, 0.1}}, true, {"note"}};
    const auto table = io::convergence_table(t);
    CHECK(table.columns == std::vector<std::string>{"T", "error"});
    CHECK(io::to_json(t)["table"][1][1].get<double>() == 0.1);

    montecarlo::TheoremReport r;
    r.table = {{25.0, 0.5, 0.1}, {25.0, 1.0, 0.2}};
    r.ess = {100.0};
    const auto doc = io::to_json(r);
    CHECK(doc["table"][1][2].get<double>() == 0.2);
    CHECK(doc["params"].contains("seed"));
    CHECK(io::ks_table(r).columns.size() == 3);
}
