#include "polymer_lab/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "polymer_lab/heatflow.hpp"
#include "polymer_lab/io.hpp"
#include "polymer_lab/laplace.hpp"
#include "polymer_lab/montecarlo.hpp"
#include "polymer_lab/spectral.hpp"
#include "polymer_lab/zerorange.hpp"

#ifndef POLYMER_LAB_VERSION
#define POLYMER_LAB_VERSION "0.0.0"
#endif

namespace polymer_lab::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

struct Options {
    std::string potential = "ball(1,0)";
    double chi = 0.0;
    double gamma = 0.0;
    std::vector<double> T_list{25.0, 100.0, 400.0};
    std::vector<double> times{0.5, 1.0};
    std::size_t n_paths = 50000;
    double dt = 0.01;
    std::optional<std::uint64_t> seed;
    std::string out = "polymer-lab-out";
    int threads = 1;
    int nodes = 400;
    std::string format = "json";
    double t = 1.0;
    double rho = 1.0;
    std::vector<double> x_grid{0.25, 0.5, 1.0, 2.0};
    std::vector<double> eps{0.5, 0.25, 0.125};
    double y = 0.5;
    std::string test = "one";
    std::optional<double> beta;
    std::optional<double> control_beta;
    double reference_gamma = 1.0;
    double threshold = 0.05;
    std::string proposal = "guided";
};

struct Outcome {
    int code = success;
    std::vector<std::string> files;
};

class Runner {
public:
    Runner(const Options& o, std::uint64_t seed, std::ostream& out) : o_(o), seed_(seed), out_(out) {}

    Outcome spectral_cmd();
    Outcome kernel_cmd();
    Outcome marginal_cmd();
    Outcome prop1_cmd();
    Outcome prop2_cmd();
    Outcome prop3_cmd();
    Outcome poten_cmd();
    Outcome theorem_cmd();
    Outcome sample_cmd();

private:
    fs::path file(const std::string& stem, const std::string& ext) const { return fs::path(o_.out) / (stem + ext); }
    bool csv() const { return o_.format == "csv"; }

    void emit(Outcome& r, const std::string& stem, const io::Table& table, const json& doc) const {
        if (csv()) {
            io::write_csv(file(stem, ".csv"), table);
            r.files.push_back(file(stem, ".csv").string());
        } else {
            io::write_json(file(stem, ".json"), doc);
            r.files.push_back(file(stem, ".json").string());
        }
    }

    montecarlo::TheoremOptions mc_options() const {
        montecarlo::TheoremOptions opt;
        opt.dt = o_.dt;
        opt.threshold = o_.threshold;
        opt.threads = o_.threads;
        opt.proposal = o_.proposal == "wiener" ? montecarlo::Proposal::wiener : montecarlo::Proposal::guided;
        return opt;
    }

    zerorange::ZeroRangeParams zero_range(double gamma) const {
        auto p = zerorange::ZeroRangeParams::make(gamma);
        p.contour.nodes = o_.nodes;
        return p;
    }

    int table_code(const heatflow::ConvergenceTable& t) const {
        for (const auto& row : t.rows) out_ << t.parameter << "=" << io::format_double(row.parameter)
                                            << " error=" << io::format_double(row.error) << '\n';
        out_ << "decreasing: " << (t.decreasing ? "yes" : "no") << '\n';
        return t.decreasing ? success : property_failure;
    }

    static int verdict_code(montecarlo::Verdict v) {
        switch (v) {
            case montecarlo::Verdict::pass:
                return success;
            case montecarlo::Verdict::fail:
                return property_failure;
            case montecarlo::Verdict::inconclusive:
                return inconclusive;
        }
        return inconclusive;
    }

    const Options& o_;
    std::uint64_t seed_;
    std::ostream& out_;
};

Outcome Runner::spectral_cmd() {
    const auto v = io::load_potential(o_.potential);
    const auto s = spectral::summarize(v);
    Outcome r;
    const json doc = io::to_json(s);
    if (csv()) {
        io::write_csv(file("spectral", ".csv"),
                      {{"beta_cr", "gamma1", "kappa", "c", "psi_at_origin", "int_v_psi", "int_v_psi_sq"},
                       {{s.beta_cr, s.gamma1, s.kappa, s.c, s.psi.at_origin(), s.int_v_psi, s.int_v_psi_sq}}});
        io::Table psi{{"r", "psi"}, {}};
        for (const auto& [x, value] : s.psi.samples(10.0)) psi.rows.push_back({x, value});
        io::write_csv(file("psi", ".csv"), psi);
        r.files = {file("spectral", ".csv").string(), file("psi", ".csv").string()};
    } else {
        io::write_json(file("spectral", ".json"), doc);
        r.files = {file("spectral", ".json").string()};
    }
    out_ << "beta_cr " << io::format_double(s.beta_cr) << '\n'
         << "gamma1 " << io::format_double(s.gamma1) << '\n'
         << "kappa " << io::format_double(s.kappa) << '\n'
         << "c " << io::format_double(s.c) << '\n';
    return r;
}

Outcome Runner::kernel_cmd() {
    auto contour = laplace::default_contour(o_.gamma);
    contour.nodes = o_.nodes;
    contour = laplace::saddle_adapted(contour, o_.rho, o_.t);
    const double k = laplace::kernel_integral(o_.gamma, o_.rho, o_.t, contour);
    const double closed = laplace::kernel_closed_form(o_.gamma, o_.rho, o_.t);
    Outcome r;
    emit(r, "kernel", {{"gamma", "t", "rho", "kernel", "closed_form"}, {{o_.gamma, o_.t, o_.rho, k, closed}}},
         json{{"gamma", o_.gamma}, {"t", o_.t}, {"rho", o_.rho}, {"kernel", k}, {"closed_form", closed}});
    out_ << io::format_double(k) << '\n';
    return r;
}

Outcome Runner::marginal_cmd() {
    const auto d = zerorange::marginal_radial(zero_range(o_.gamma), o_.t);
    const io::Table table = io::density_table(d);
    json doc{{"gamma", o_.gamma}, {"t", o_.t}, {"total_mass", d.total_mass()}, {"mean", d.mean()}};
    json rows = json::array();
    for (const auto& row : table.rows) rows.push_back(row);
    doc["columns"] = table.columns;
    doc["table"] = rows;
    Outcome r;
    emit(r, "marginal", table, doc);
    out_ << "mass " << io::format_double(d.total_mass()) << "\nmean " << io::format_double(d.mean()) << '\n';
    return r;
}

Outcome Runner::prop1_cmd() {
    const auto t = heatflow::verify_prop1(io::load_potential(o_.potential), o_.chi, o_.T_list, o_.t, o_.x_grid);
    Outcome r;
    emit(r, "prop1", io::convergence_table(t), io::to_json(t));
    r.code = table_code(t);
    return r;
}

Outcome Runner::prop3_cmd() {
    const auto t = heatflow::verify_prop3(io::load_potential(o_.potential), o_.chi, o_.T_list, o_.t, o_.x_grid);
    Outcome r;
    emit(r, "prop3", io::convergence_table(t), io::to_json(t));
    r.code = table_code(t);
    return r;
}

Outcome Runner::poten_cmd() {
    const auto t = heatflow::verify_poten_family(o_.gamma, o_.eps, o_.t);
    Outcome r;
    emit(r, "poten", io::convergence_table(t), io::to_json(t));
    r.code = table_code(t);
    return r;
}

Outcome Runner::prop2_cmd() {
    montecarlo::RadialTest f;
    if (o_.test == "one") {
        f = [](double) { return 1.0; };
    } else {
        f = [](double x) { return std::exp(-0.5 * x * x); };
    }
    const auto rep = montecarlo::verify_prop2(io::load_potential(o_.potential), o_.chi, o_.T_list, o_.t, o_.y, f,
                                              o_.n_paths, seed_, mc_options());
    Outcome r;
    emit(r, "prop2", io::prop2_table(rep), io::to_json(rep));
    for (const auto& row : rep.table) {
        out_ << "T=" << io::format_double(row.T) << " estimate=" << io::format_double(row.estimate)
             << " se=" << io::format_double(row.standard_error) << " model=" << io::format_double(row.model)
             << " gap=" << io::format_double(row.gap) << '\n';
    }
    out_ << "verdict: " << montecarlo::to_string(rep.verdict) << '\n';
    r.code = verdict_code(rep.verdict);
    return r;
}

Outcome Runner::theorem_cmd() {
    const auto v = io::load_potential(o_.potential);
    const auto rep = o_.control_beta
                         ? montecarlo::verify_subcritical_control(v, *o_.control_beta, o_.reference_gamma, o_.T_list,
                                                                  o_.times, o_.n_paths, seed_, mc_options())
                         : montecarlo::verify_theorem2(v, o_.chi, o_.T_list, o_.times, o_.n_paths, seed_, mc_options());
    Outcome r;
    emit(r, o_.control_beta ? "control" : "theorem", io::ks_table(rep), io::to_json(rep));
    for (const auto& row : rep.table) {
        out_ << "T=" << io::format_double(row.T) << " t=" << io::format_double(row.t)
             << " ks=" << io::format_double(row.ks);
        if (row.ks_reference >= 0.0) out_ << " ks_reference=" << io::format_double(row.ks_reference);
        out_ << '\n';
    }
    for (const auto& note : rep.notes) out_ << "note: " << note << '\n';
    out_ << "verdict: " << montecarlo::to_string(rep.verdict) << '\n';
    r.code = verdict_code(rep.verdict);
    return r;
}

Outcome Runner::sample_cmd() {
    if (o_.T_list.size() != 1) {
        throw std::invalid_argument("sample: --T takes a single horizon");
    }
    const auto v = io::load_potential(o_.potential);
    const double T = o_.T_list.front();
    const double beta = o_.beta ? *o_.beta : spectral::critical_beta(v) + o_.chi / std::sqrt(T);
    montecarlo::SamplingOptions opt;
    for (double t : o_.times) opt.record_times.push_back(t * T);
    opt.threads = o_.threads;
    opt.proposal = mc_options().proposal;
    const auto e = montecarlo::sample_weighted_paths(v, beta, T, o_.dt, o_.n_paths, seed_, {0.0, 0.0, 0.0}, opt);
    Outcome r;
    io::save_ensemble(file("ensemble", ".bin"), e);
    r.files.push_back(file("ensemble", ".bin").string());

    const auto scaled = montecarlo::rescale_ensemble(e);
    io::Table table{{"t", "mean_radius", "standard_error"}, {}};
    for (double t : scaled.times) {
        const auto ecdf = montecarlo::empirical_radial_marginal(scaled, t);
        table.rows.push_back({t, ecdf.mean(), ecdf.mean_standard_error()});
    }
    json rows = json::array();
    for (const auto& row : table.rows) rows.push_back(row);
    emit(r, "sample", table,
         json{{"params", {{"beta", beta}, {"T", T}, {"dt", o_.dt}, {"n_paths", o_.n_paths}, {"seed", seed_},
                          {"proposal", montecarlo::to_string(e.proposal)}}},
              {"ess", e.ess},
              {"ess_warning", e.ess_warning},
              {"columns", table.columns},
              {"table", rows}});
    out_ << "ess " << io::format_double(e.ess) << (e.ess_warning ? " (below 1% of paths)" : "") << '\n';
    r.code = e.ess_warning ? inconclusive : success;
    return r;
}

std::optional<std::uint64_t> env_seed() {
    const char* text = std::getenv("POLYMER_LAB_SEED");
    if (text == nullptr || *text == '\0') return std::nullopt;
    char* end = nullptr;
    const unsigned long long value = std::strtoull(text, &end, 10);
    if (*end != '\0') {
        throw std::invalid_argument(std::string("POLYMER_LAB_SEED is not an unsigned integer: ") + text);
    }
    return value;
}

json inputs(const Options& o, const std::string& command, std::uint64_t seed, const std::string& seed_source) {
    json j{{"command", command},
           {"potential", o.potential},
           {"chi", o.chi},
           {"gamma", o.gamma},
           {"T", o.T_list},
           {"times", o.times},
           {"n_paths", o.n_paths},
           {"dt", o.dt},
           {"seed", seed},
           {"seed_source", seed_source},
           {"threads", o.threads},
           {"nodes", o.nodes},
           {"format", o.format},
           {"t", o.t},
           {"rho", o.rho},
           {"x", o.x_grid},
           {"eps", o.eps},
           {"y", o.y},
           {"test", o.test},
           {"threshold", o.threshold},
           {"proposal", o.proposal},
           {"reference_gamma", o.reference_gamma}};
    j["beta"] = o.beta ? json(*o.beta) : json(nullptr);
    j["control_beta"] = o.control_beta ? json(*o.control_beta) : json(nullptr);
    return j;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Critical-window polymer measures: constants, kernels and convergence checks", "polymer-lab"};
    app.set_version_flag("--version", POLYMER_LAB_VERSION);
    app.require_subcommand(1);

    auto positive = CLI::PositiveNumber;
    auto add_potential = [&](CLI::App* c) {
        c->add_option("--potential", o.potential, "CSV file (r,v with a .json R_support sidecar) or ball(eps,gamma) / triangle(h,R)")
            ->capture_default_str();
    };
    auto add_common = [&](CLI::App* c) {
        c->add_option("--out", o.out, "Output directory")->capture_default_str();
        c->add_option("--format", o.format, "Artifact format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
        c->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    };
    auto add_mc = [&](CLI::App* c) {
        c->add_option("--n-paths", o.n_paths, "Paths per ensemble")->check(CLI::Range(std::size_t{1000}, std::numeric_limits<std::size_t>::max()))->capture_default_str();
        c->add_option("--dt", o.dt, "Time step")->check(positive)->capture_default_str();
        c->add_option("--seed", o.seed, "Stream seed (fallback POLYMER_LAB_SEED, then 1)");
        c->add_option("--proposal", o.proposal, "Path proposal")->check(CLI::IsMember({"guided", "wiener"}))->capture_default_str();
    };
    auto add_T = [&](CLI::App* c) {
        c->add_option("--T", o.T_list, "Horizons, comma separated")->delimiter(',')->check(positive)->capture_default_str();
    };

    auto* spectral_app = app.add_subcommand("spectral", "beta_cr, gamma1, kappa, c and psi for a potential");
    add_potential(spectral_app);
    add_common(spectral_app);

    auto* kernel_app = app.add_subcommand("kernel", "K(gamma, rho, t) by contour quadrature");
    kernel_app->add_option("--gamma", o.gamma)->capture_default_str();
    kernel_app->add_option("--t", o.t)->check(positive)->capture_default_str();
    kernel_app->add_option("--rho", o.rho)->check(positive)->capture_default_str();
    kernel_app->add_option("--nodes", o.nodes, "Quadrature nodes per ray")->check(CLI::PositiveNumber)->capture_default_str();
    add_common(kernel_app);

    auto* marginal_app = app.add_subcommand("marginal", "Radial one-time marginal of Q_gamma");
    marginal_app->add_option("--gamma", o.gamma)->capture_default_str();
    marginal_app->add_option("--t", o.t)->check(CLI::Range(0.0, 1.0))->capture_default_str();
    marginal_app->add_option("--nodes", o.nodes, "Quadrature nodes per ray")->check(CLI::PositiveNumber)->capture_default_str();
    add_common(marginal_app);

    auto add_window = [&](CLI::App* c) {
        add_potential(c);
        c->add_option("--chi", o.chi, "beta(T) = beta_cr + chi / sqrt(T)")->capture_default_str();
        add_T(c);
        c->add_option("--t", o.t, "Rescaled time")->check(CLI::Range(0.0, 1.0))->capture_default_str();
        add_common(c);
    };
    auto* prop1_app = app.add_subcommand("verify-prop1", "Rescaled kernel against its zero-range limit");
    add_window(prop1_app);
    prop1_app->add_option("--x", o.x_grid, "Rescaled radii")->delimiter(',')->check(positive)->capture_default_str();
    auto* prop3_app = app.add_subcommand("verify-prop3", "Rescaled partition function against its zero-range limit");
    add_window(prop3_app);
    prop3_app->add_option("--x", o.x_grid, "Rescaled radii")->delimiter(',')->check(positive)->capture_default_str();
    auto* prop2_app = app.add_subcommand("verify-prop2", "Monte Carlo E^y[e^{beta int v} f] against the zero-range model");
    add_window(prop2_app);
    add_mc(prop2_app);
    prop2_app->add_option("--y", o.y, "|y| / sqrt(T)")->check(positive)->capture_default_str();
    prop2_app->add_option("--test", o.test, "f = 1 or a unit Gaussian bump")->check(CLI::IsMember({"one", "gauss"}))->capture_default_str();

    auto* poten_app = app.add_subcommand("verify-poten", "Shrinking-ball family against Q_gamma");
    poten_app->add_option("--gamma", o.gamma)->capture_default_str();
    poten_app->add_option("--eps", o.eps, "Ball radii")->delimiter(',')->check(positive)->capture_default_str();
    poten_app->add_option("--t", o.t)->check(CLI::Range(0.0, 1.0))->capture_default_str();
    add_common(poten_app);

    auto* theorem_app = app.add_subcommand("verify-theorem", "KS distance of rescaled polymer marginals to Q_gamma");
    add_potential(theorem_app);
    theorem_app->add_option("--chi", o.chi)->capture_default_str();
    add_T(theorem_app);
    theorem_app->add_option("--times", o.times, "Rescaled times")->delimiter(',')->check(CLI::Range(0.0, 1.0))->capture_default_str();
    theorem_app->add_option("--threshold", o.threshold, "KS bound at the largest T")->capture_default_str();
    theorem_app->add_option("--control-beta", o.control_beta, "Fixed subcritical beta: compare with the Brownian law instead");
    theorem_app->add_option("--reference-gamma", o.reference_gamma, "Q_gamma used as the negative reference in control runs")->capture_default_str();
    add_mc(theorem_app);
    add_common(theorem_app);

    auto* sample_app = app.add_subcommand("sample", "Write a weighted path ensemble");
    add_potential(sample_app);
    sample_app->add_option("--chi", o.chi)->capture_default_str();
    sample_app->add_option("--beta", o.beta, "Coupling; default beta_cr + chi / sqrt(T)");
    sample_app->add_option("--T", o.T_list, "Horizon")->delimiter(',')->check(positive);
    sample_app->add_option("--times", o.times, "Rescaled record times")->delimiter(',')->check(CLI::Range(0.0, 1.0))->capture_default_str();
    add_mc(sample_app);
    add_common(sample_app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? success : usage_error;
    }

    CLI::App* chosen = app.get_subcommands().front();
    const std::string command = chosen->get_name();
    if (command == "sample" && chosen->count("--T") == 0) {
        o.T_list = {25.0};
    }

    const auto started = std::chrono::steady_clock::now();
    try {
        std::string seed_source = "default";
        std::uint64_t seed = 1;
        if (o.seed) {
            seed = *o.seed;
            seed_source = "flag";
        } else if (const auto env = env_seed()) {
            seed = *env;
            seed_source = "POLYMER_LAB_SEED";
        }
        Runner runner(o, seed, out);
        const std::map<std::string, std::function<Outcome()>> table{
            {"spectral", [&] { return runner.spectral_cmd(); }},
            {"kernel", [&] { return runner.kernel_cmd(); }},
            {"marginal", [&] { return runner.marginal_cmd(); }},
            {"verify-prop1", [&] { return runner.prop1_cmd(); }},
            {"verify-prop2", [&] { return runner.prop2_cmd(); }},
            {"verify-prop3", [&] { return runner.prop3_cmd(); }},
            {"verify-poten", [&] { return runner.poten_cmd(); }},
            {"verify-theorem", [&] { return runner.theorem_cmd(); }},
            {"sample", [&] { return runner.sample_cmd(); }},
        };
        const Outcome result = table.at(command)();
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        io::write_json(fs::path(o.out) / "manifest.json",
                       json{{"program", "polymer-lab"},
                            {"version", POLYMER_LAB_VERSION},
                            {"inputs", inputs(o, command, seed, seed_source)},
                            {"outputs", result.files},
                            {"exit_code", result.code},
                            {"wall_time_s", wall}});
        return result.code;
    } catch (const std::exception& e) {
        err << "polymer-lab " << command << ": " << e.what() << '\n';
        return usage_error;
    }
}

}  // namespace polymer_lab::cli
