#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "ks/cli.hpp"
#include "ks/json_writer.hpp"

namespace ks::cli {

namespace {

struct RawArgs {
  std::string config;
  std::string lambda;
  std::string z;
  std::string convention;
  std::string format = "json";
  std::string out;
  std::string direction = "0,0,1";
  int n_theta = 0;
  int n_phi = 0;
  bool scaled = false;
  unsigned threads = 0;
};

struct SubcommandInfo {
  Command command;
  const char* name;
  const char* help;
};

constexpr SubcommandInfo kSubcommands[] = {
    {Command::Validate, "validate", "Separation data and summability report"},
    {Command::Qmat, "qmat", "Q-matrix entries at --z \"re,im\" or at --lambda X (boundary value)"},
    {Command::Smat, "smat", "S-matrix data: Cayley matrix, kernel samples, unitarity defect"},
    {Command::Dets, "dets", "det S over an energy sweep"},
    {Command::Xsect, "xsect", "Scattering amplitude and cross sections for --direction"},
    {Command::Add, "add", "Incremental point-addition trace against direct assembly"},
    {Command::Sweep, "sweep", "Per-energy det S phase, total cross section, unitarity defect"},
};

void add_options(CLI::App& sub, RawArgs& raw, Command command) {
  sub.add_option("--config", raw.config, "Configuration file (JSON)")->required();
  if (command != Command::Validate) {
    sub.add_option("--lambda", raw.lambda, "Energy X or inclusive range A:B:STEP");
    sub.add_option("--ntheta", raw.n_theta, "Polar Gauss-Legendre nodes");
    sub.add_option("--nphi", raw.n_phi, "Azimuthal nodes (even)");
    sub.add_option("--threads", raw.threads, "Worker threads (0 = hardware count)");
  }
  if (command == Command::Qmat) sub.add_option("--z", raw.z, "Interior spectral point \"re,im\"");
  if (command == Command::Smat || command == Command::Xsect || command == Command::Sweep) {
    sub.add_option("--direction", raw.direction, "Incoming direction \"x,y,z\"");
  }
  if (command == Command::Smat || command == Command::Dets || command == Command::Xsect ||
      command == Command::Sweep) {
    sub.add_flag("--scaled", raw.scaled, "Assemble through the |L|^-1/2-scaled denominator");
  }
  sub.add_option("--convention", raw.convention, "Coupling convention: 4pi or 1")
      ->check(CLI::IsMember({"4pi", "1"}));
  sub.add_option("--format", raw.format, "Output format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  sub.add_option("--out", raw.out, "Output file (default stdout)");
  sub.footer("CSV columns: " + std::string(csv_columns(command)));
}

RunSpec to_spec(Command command, const RawArgs& raw) {
  RunSpec spec;
  spec.command = command;
  spec.config_path = raw.config;
  if (!raw.lambda.empty()) spec.lambdas = parse_lambda(raw.lambda);
  if (!raw.z.empty()) spec.z = parse_complex(raw.z);
  if (raw.n_theta != 0) spec.n_theta = raw.n_theta;
  if (raw.n_phi != 0) spec.n_phi = raw.n_phi;
  if (!raw.convention.empty()) {
    spec.convention = raw.convention == "1" ? CouplingConvention::Unit : CouplingConvention::FourPi;
  }
  spec.format = raw.format == "csv" ? OutputFormat::Csv : OutputFormat::Json;
  spec.out_path = raw.out;
  spec.direction = parse_vec3(raw.direction);
  spec.scaled = raw.scaled;
  spec.threads = raw.threads;
  if (const char* env = std::getenv("KS_DEFAULT_GRID")) spec.default_grid = env;
  return spec;
}

void write_usage_error(std::string_view kind, const std::string& message) {
  io::JsonWriter js(std::cerr);
  js.begin_object();
  js.key("error").begin_object();
  js.key("kind").value(kind);
  js.key("category").value("input");
  js.key("message").value(message);
  js.end_object();
  js.end_object();
  js.finish();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-range point interactions in R^3: Q-matrices, S-matrices, cross sections"};
  app.require_subcommand(1);
  std::string footer = "Subcommand CSV columns (header row always printed):";
  for (const auto& info : kSubcommands) {
    footer += "\n  " + std::string(info.name) + ": " + std::string(csv_columns(info.command));
  }
  footer += "\nKS_DEFAULT_GRID=\"NTHETA[,NPHI]\" overrides the default sphere resolution.";
  footer += "\nExit codes: 0 success, 2 input error, 3 numerical singularity.";
  app.footer(footer);

  RawArgs raw;
  std::vector<std::pair<CLI::App*, Command>> subs;
  for (const auto& info : kSubcommands) {
    CLI::App* sub = app.add_subcommand(info.name, info.help);
    add_options(*sub, raw, info.command);
    subs.emplace_back(sub, info.command);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    write_usage_error("InvalidArgument", e.what());
    return 2;
  }

  Command command = Command::Validate;
  for (const auto& [sub, cmd] : subs) {
    if (sub->parsed()) command = cmd;
  }
  RunSpec spec;
  try {
    spec = to_spec(command, raw);
  } catch (const Error& e) {
    write_usage_error(ks::to_string(e.kind()), e.what());
    return 2;
  }
  return run(spec, std::cout, std::cerr);
}

}  // namespace ks::cli
