#include "polymer_lab/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>

namespace polymer_lab::io {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    return out;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return in;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream in(line);
    std::string cell;
    while (std::getline(in, cell, ',')) {
        cells.push_back(trim(cell));
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

double parse_double(const std::string& text, const fs::path& path, std::size_t line) {
    double x = 0.0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, x);
    if (ec != std::errc() || ptr != end) {
        throw IoError(path.string() + ":" + std::to_string(line) + ": not a number: '" + text + "'");
    }
    return x;
}

json number(double x) {
    // JSON has no literal for non-finite values
    return std::isfinite(x) ? json(x) : json(nullptr);
}

template <class T>
void put(std::ostream& out, T value) {
    static_assert(std::endian::native == std::endian::little, "ensemble files are little-endian");
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::istream& in, const fs::path& path) {
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
        throw IoError(path.string() + ": truncated ensemble file");
    }
    return value;
}

constexpr char kMagic[8] = {'P', 'L', 'E', 'N', 'S', 'E', 'M', 'B'};
constexpr std::uint32_t kEnsembleVersion = 1;

}  // namespace

std::string format_double(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

void write_csv(const fs::path& path, const Table& table) {
    auto out = open_out(path);
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
        out << (j ? "," : "") << table.columns[j];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            out << (j ? "," : "") << format_double(row[j]);
        }
        out << '\n';
    }
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

Table read_csv(const fs::path& path) {
    auto in = open_in(path);
    Table table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty() || trim(line).front() == '#') continue;
        const auto cells = split(line);
        if (table.columns.empty()) {
            table.columns = cells;
            continue;
        }
        if (cells.size() != table.columns.size()) {
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                          std::to_string(table.columns.size()) + " columns, found " + std::to_string(cells.size()));
        }
        std::vector<double> row;
        for (const auto& c : cells) row.push_back(parse_double(c, path, line_no));
        table.rows.push_back(std::move(row));
    }
    if (table.columns.empty()) {
        throw IoError(path.string() + ": empty file");
    }
    return table;
}

void write_json(const fs::path& path, const json& value) {
    auto out = open_out(path);
    out << value.dump(2) << '\n';
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

json read_json(const fs::path& path) {
    auto in = open_in(path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

// --- potentials ------------------------------------------------------------

std::optional<spectral::RadialPotential> parse_preset(const std::string& text) {
    static const std::regex pattern(R"(^\s*(ball|triangle)\s*\(\s*([^,\s]+)\s*,\s*([^,\s\)]+)\s*\)\s*$)");
    std::smatch m;
    if (!std::regex_match(text, m, pattern)) {
        return std::nullopt;
    }
    const double a = parse_double(m[2].str(), text, 0);
    const double b = parse_double(m[3].str(), text, 0);
    return m[1].str() == "ball" ? spectral::RadialPotential::ball(a, b) : spectral::RadialPotential::triangle(a, b);
}

spectral::RadialPotential load_potential(const std::string& source) {
    if (auto preset = parse_preset(source)) {
        return *preset;
    }
    const fs::path path(source);
    if (!fs::exists(path)) {
        throw IoError("potential: '" + source + "' is neither a preset nor an existing file");
    }
    const Table t = read_csv(path);
    if (t.columns.size() != 2 || t.columns[0] != "r" || t.columns[1] != "v") {
        throw IoError(path.string() + ": expected header r,v");
    }
    fs::path sidecar = path;
    sidecar.replace_extension(".json");
    if (!fs::exists(sidecar)) {
        throw IoError(path.string() + ": missing sidecar " + sidecar.string());
    }
    const json meta = read_json(sidecar);
    if (!meta.contains("R_support") || !meta["R_support"].is_number()) {
        throw IoError(sidecar.string() + ": R_support must be a number");
    }
    std::vector<double> r;
    std::vector<double> v;
    for (const auto& row : t.rows) {
        r.push_back(row[0]);
        v.push_back(row[1]);
    }
    spectral::RadialPotential pot(std::move(r), std::move(v), meta["R_support"].get<double>());
    pot.set_label(path.filename().string());
    return pot;
}

void save_potential(const fs::path& csv_path, const spectral::RadialPotential& v) {
    Table t{{"r", "v"}, {}};
    for (std::size_t i = 0; i < v.grid().size(); ++i) {
        t.rows.push_back({v.grid()[i], v.values()[i]});
    }
    write_csv(csv_path, t);
    fs::path sidecar = csv_path;
    sidecar.replace_extension(".json");
    write_json(sidecar, json{{"R_support", v.support_radius()}});
}

// --- tables ----------------------------------------------------------------

Table density_table(const RadialDensity& d) {
    Table t{{"r", "density", "cdf"}, {}};
    for (std::size_t i = 0; i < d.grid().size(); ++i) {
        t.rows.push_back({d.grid()[i], d.density()[i], d.cdf(d.grid()[i])});
    }
    return t;
}

Table convergence_table(const heatflow::ConvergenceTable& c) {
    Table t{{c.parameter, "error"}, {}};
    for (const auto& row : c.rows) t.rows.push_back({row.parameter, row.error});
    return t;
}

Table ks_table(const montecarlo::TheoremReport& r) {
    const bool control = !r.table.empty() && r.table.front().ks_reference >= 0.0;
    Table t{{"T", "t", "ks"}, {}};
    if (control) t.columns.push_back("ks_reference");
    for (const auto& row : r.table) {
        t.rows.push_back({row.T, row.t, row.ks});
        if (control) t.rows.back().push_back(row.ks_reference);
    }
    return t;
}

Table prop2_table(const montecarlo::Prop2Report& r) {
    Table t{{"T", "estimate", "standard_error", "model", "gap"}, {}};
    for (const auto& row : r.table) {
        t.rows.push_back({row.T, row.estimate, row.standard_error, row.model, row.gap});
    }
    return t;
}

// --- JSON reports ----------------------------------------------------------

json to_json(const spectral::SpectralSummary& s, double psi_outer) {
    json psi = json::array();
    for (const auto& [r, value] : s.psi.samples(psi_outer)) {
        psi.push_back({r, value});
    }
    return json{{"beta_cr", number(s.beta_cr)},
                {"gamma1", number(s.gamma1)},
                {"kappa", number(s.kappa)},
                {"c", number(s.c)},
                {"psi_at_origin", number(s.psi.at_origin())},
                {"int_v_psi", number(s.int_v_psi)},
                {"int_v_psi_sq", number(s.int_v_psi_sq)},
                {"psi", psi}};
}

json to_json(const heatflow::ConvergenceTable& c) {
    json rows = json::array();
    for (const auto& row : c.rows) rows.push_back({row.parameter, number(row.error)});
    return json{{"parameter", c.parameter}, {"table", rows}, {"decreasing", c.decreasing}, {"notes", c.notes}};
}

json to_json(const montecarlo::TheoremReport& r) {
    json rows = json::array();
    for (const auto& row : r.table) {
        json entry = {row.T, row.t, number(row.ks)};
        if (row.ks_reference >= 0.0) entry.push_back(number(row.ks_reference));
        rows.push_back(entry);
    }
    return json{{"params",
                 {{"chi", r.chi},
                  {"gamma", r.gamma},
                  {"beta_cr", r.beta_cr},
                  {"T", r.T_list},
                  {"times", r.times},
                  {"beta", r.betas},
                  {"n_paths", r.n},
                  {"seed", r.seed},
                  {"dt", r.dt},
                  {"threshold", r.threshold}}},
                {"ess", r.ess},
                {"table", rows},
                {"verdict", montecarlo::to_string(r.verdict)},
                {"notes", r.notes}};
}

json to_json(const montecarlo::Prop2Report& r) {
    json rows = json::array();
    for (const auto& row : r.table) {
        rows.push_back({row.T, number(row.estimate), number(row.standard_error), number(row.model), number(row.gap)});
    }
    return json{{"params",
                 {{"chi", r.chi},
                  {"gamma", r.gamma},
                  {"t", r.t},
                  {"y_scaled", r.y_scaled},
                  {"n_paths", r.n},
                  {"seed", r.seed}}},
                {"columns", {"T", "estimate", "standard_error", "model", "gap"}},
                {"table", rows},
                {"verdict", montecarlo::to_string(r.verdict)},
                {"notes", r.notes}};
}

// --- ensembles -------------------------------------------------------------

void save_ensemble(const fs::path& path, const montecarlo::PathEnsemble& e) {
    auto out = open_out(path, std::ios::out | std::ios::binary);
    out.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, kEnsembleVersion);
    put<std::uint64_t>(out, e.n_paths);
    put<std::uint64_t>(out, e.times.size());
    put<double>(out, e.dt);
    put<double>(out, e.T);
    put<std::uint64_t>(out, e.seed);
    put<double>(out, e.beta);
    put<std::uint32_t>(out, e.proposal == montecarlo::Proposal::guided ? 1u : 0u);
    out.write(reinterpret_cast<const char*>(e.times.data()), static_cast<std::streamsize>(e.times.size() * 8));
    out.write(reinterpret_cast<const char*>(e.positions.data()), static_cast<std::streamsize>(e.positions.size() * 8));
    out.write(reinterpret_cast<const char*>(e.log_weights.data()),
              static_cast<std::streamsize>(e.log_weights.size() * 8));
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

montecarlo::PathEnsemble load_ensemble(const fs::path& path) {
    auto in = open_in(path, std::ios::in | std::ios::binary);
    char magic[8];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw IoError(path.string() + ": not an ensemble file");
    }
    if (get<std::uint32_t>(in, path) != kEnsembleVersion) {
        throw IoError(path.string() + ": unsupported ensemble version");
    }
    montecarlo::PathEnsemble e;
    e.n_paths = get<std::uint64_t>(in, path);
    const auto steps = get<std::uint64_t>(in, path);
    e.dt = get<double>(in, path);
    e.T = get<double>(in, path);
    e.seed = get<std::uint64_t>(in, path);
    e.beta = get<double>(in, path);
    e.proposal = get<std::uint32_t>(in, path) == 1u ? montecarlo::Proposal::guided : montecarlo::Proposal::wiener;
    auto read_block = [&](std::vector<double>& dst, std::size_t count) {
        dst.resize(count);
        if (!in.read(reinterpret_cast<char*>(dst.data()), static_cast<std::streamsize>(count * 8))) {
            throw IoError(path.string() + ": truncated ensemble file");
        }
    };
    read_block(e.times, steps);
    read_block(e.positions, e.n_paths * steps * 3);
    read_block(e.log_weights, e.n_paths);
    e.ess = montecarlo::effective_sample_size(e.log_weights);
    e.ess_warning = e.ess < 0.01 * static_cast<double>(e.n_paths);
    return e;
}

}  // namespace polymer_lab::io
