#pragma once

// Configuration parsing, command orchestration, and CSV serialization for the
// elastores command-line tool. Everything here is deliberately boring: strict
// JSON in, deterministic CSV out, exceptions mapped to process exit codes.

#include "elastores/geometry.hpp"
#include "elastores/kernels.hpp"
#include "elastores/quadrature.hpp"
#include "elastores/scattering.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace elastores {

// ---------------------------------------------------------------------------
// Numeric CSV
// ---------------------------------------------------------------------------

// 12 significant digits, '.' decimal separator, locale-independent. This is
// the single formatting routine behind every file the tool writes, so equal
// inputs produce byte-identical outputs.
std::string format_number(double v);

// A purely numeric table; integer-valued quantities (mode indices, flags,
// counts) are stored as doubles and print without a fractional part.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

void write_csv(const CsvTable& table, const std::string& path);
CsvTable read_csv(const std::string& path);

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct IncidentConfig {
    WaveKind kind = WaveKind::kCompressional;
    Vec3 direction = Vec3::UnitZ();    // unit-normalized on load
    Vec3 polarization = Vec3::UnitX();  // shear only; orthonormalized on load
};

// Frequency window for scans, in multiples of the largest asymptotic resonant
// frequency sqrt(lambda_max delta / (rho tau^2)). Relative bounds keep one
// window meaningful across a delta sweep spanning several decades.
struct ScanConfig {
    double omega_min = 0.2;
    double omega_max = 3.0;
    int count = 60;
};

struct RunConfig {
    std::string mesh_path;  // resolved against the config file's directory
    ElasticMedium medium{1.0, 1.0, 1.0};
    double delta = 1e-4;
    double tau = 1.0;
    double epsilon = 1e-4;  // derived: delta / tau^2
    IncidentConfig incident;
    QuadratureConfig quadrature;
    ScanConfig scan;
    std::vector<double> sweep{1e-2, 1e-3, 1e-4};
    int directions = 100;
    std::string output_dir = "out";
};

// Parses and validates a JSON config file. Unknown keys anywhere in the
// document are errors; all failures throw ConfigError.
RunConfig parse_config(const std::string& path);

// Same schema from an in-memory document; relative mesh paths resolve against
// base_dir.
RunConfig parse_config_text(const std::string& text, const std::string& base_dir = ".");

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct CliOptions {
    std::string method = "both";  // resonances: asymptotic | qep | both
    std::uint64_t seed = 12345;   // randomized controls in verify
    int threads = 1;
    std::string out_override;  // overrides config.output_dir when non-empty
    bool plot = false;         // scan: also emit a gnuplot script
    bool dump_operators = false;  // operators: also write binary snapshots
    int exterior_samples = 0;     // field: exterior evaluation points
};

// Executes one subcommand (basis, operators, resonances, scan, field,
// verify), writing artifacts under the output directory. Returns the process
// exit code: 0 ok, 2 config error, 3 mesh error, 4 numerical failure,
// 5 verification failure.
int run_command(const std::string& command, const RunConfig& config,
                const CliOptions& options);

// Full argv entry point used by the elastores binary.
int run_cli(int argc, const char* const* argv);

}  // namespace elastores
