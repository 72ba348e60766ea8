#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ks/common.hpp"
#include "ks/config.hpp"
#include "ks/sphere.hpp"

namespace ks::cli {

enum class Command { Validate, Qmat, Smat, Dets, Xsect, Add, Sweep };
enum class OutputFormat { Json, Csv };

std::string_view to_string(Command command);

struct RunSpec {
  Command command = Command::Validate;
  std::string config_path;
  std::vector<double> lambdas;
  /// Interior spectral point for qmat.
  std::optional<cplx> z;
  std::optional<int> n_theta;
  std::optional<int> n_phi;
  /// Overrides the convention stored in the config file.
  std::optional<CouplingConvention> convention;
  OutputFormat format = OutputFormat::Json;
  /// Empty writes to the output stream handed to run().
  std::string out_path;
  Vec3 direction{0.0, 0.0, 1.0};
  /// Assemble S through the |L|^{-1/2}-scaled denominator.
  bool scaled = false;
  /// Value of KS_DEFAULT_GRID, "NTHETA" or "NTHETA,NPHI".
  std::optional<std::string> default_grid;
  /// Worker threads for per-energy work; 0 picks the hardware count.
  unsigned threads = 0;
};

struct LoadedConfig {
  PointConfiguration config;
  /// Explicit point lists are finite; generated lattices are truncations.
  FamilyExtent extent = FamilyExtent::Finite;
};

/// Parses a configuration document. `origin` names the source in
/// diagnostics. Throws ParseError or the config-module validation errors.
LoadedConfig parse_config(std::string_view text, std::string_view origin = "<input>");
LoadedConfig load_config(const std::string& path);

/// "X" or inclusive range "A:B:STEP". Throws InvalidArgument.
std::vector<double> parse_lambda(std::string_view text);
/// "re,im" or a bare real number.
cplx parse_complex(std::string_view text);
Vec3 parse_vec3(std::string_view text);

/// Flags beat KS_DEFAULT_GRID, which beats default_resolution(). A lone
/// n_theta implies n_phi = 2 n_theta.
GridResolution resolve_grid(const RunSpec& spec, double lambda, double diameter);

/// CSV header of each subcommand.
std::string_view csv_columns(Command command);

/// Executes `spec`, writing the result to `out` (or spec.out_path) and a
/// JSON error object to `err`. Returns 0, 2 (input error) or 3
/// (numerical singularity).
int run(const RunSpec& spec, std::ostream& out, std::ostream& err);

/// Command-line entry point.
int main(int argc, char** argv);

}  // namespace ks::cli
