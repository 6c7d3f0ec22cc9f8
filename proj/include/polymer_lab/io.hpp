#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "polymer_lab/heatflow.hpp"
#include "polymer_lab/montecarlo.hpp"
#include "polymer_lab/radial.hpp"
#include "polymer_lab/spectral.hpp"

/// File formats: numeric CSV with a header row, JSON reports, potential
/// profiles with a JSON sidecar, and the flat binary ensemble layout.
namespace polymer_lab::io {

using json = nlohmann::ordered_json;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest decimal that parses back to the same double.
std::string format_double(double x);

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

void write_csv(const std::filesystem::path& path, const Table& table);
Table read_csv(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& value);
json read_json(const std::filesystem::path& path);

/// `ball(eps, gamma)` or `triangle(height, radius)`; nullopt if the text is not a preset.
std::optional<spectral::RadialPotential> parse_preset(const std::string& text);

/// A preset, or a CSV `r,v` file whose sidecar (same stem, .json) holds R_support.
spectral::RadialPotential load_potential(const std::string& source);
void save_potential(const std::filesystem::path& csv_path, const spectral::RadialPotential& v);

Table density_table(const RadialDensity& d);
Table convergence_table(const heatflow::ConvergenceTable& t);
Table ks_table(const montecarlo::TheoremReport& r);
Table prop2_table(const montecarlo::Prop2Report& r);

/// beta_cr, gamma1, kappa, c, the psi integrals and psi samples out to `psi_outer`.
json to_json(const spectral::SpectralSummary& s, double psi_outer = 10.0);
json to_json(const heatflow::ConvergenceTable& t);
json to_json(const montecarlo::TheoremReport& r);
json to_json(const montecarlo::Prop2Report& r);

/// Little-endian layout: "PLENSEMB", u32 version, u64 n, u64 steps, f64 dt,
/// f64 T, u64 seed, f64 beta, u32 proposal, f64 times[steps]; then f64
/// positions [n][steps][3]; then f64 log-weights [n].
void save_ensemble(const std::filesystem::path& path, const montecarlo::PathEnsemble& e);
montecarlo::PathEnsemble load_ensemble(const std::filesystem::path& path);

}  // namespace polymer_lab::io
