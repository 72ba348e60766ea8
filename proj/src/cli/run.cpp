#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include "ks/cli.hpp"
#include "ks/greens.hpp"
#include "ks/incremental.hpp"
#include "ks/json_writer.hpp"
#include "ks/linalg.hpp"
#include "ks/scattering.hpp"

namespace ks::cli {

using io::format_number;
using io::JsonWriter;

std::string_view to_string(Command command) {
  switch (command) {
    case Command::Validate: return "validate";
    case Command::Qmat: return "qmat";
    case Command::Smat: return "smat";
    case Command::Dets: return "dets";
    case Command::Xsect: return "xsect";
    case Command::Add: return "add";
    case Command::Sweep: return "sweep";
  }
  return "unknown";
}

std::string_view csv_columns(Command command) {
  switch (command) {
    case Command::Validate:
      return "order,sum_b,sum_b_over_delta,verdict,tail_estimate";
    case Command::Qmat:
      return "m,n,re,im,cond";
    case Command::Smat:
      return "lambda,N,n_theta,n_phi,path,det_re,det_im,unitarity_defect,cond";
    case Command::Dets:
      return "lambda,det_re,det_im,det_modulus,det_phase,cond";
    case Command::Xsect:
      return "lambda,nx,ny,nz,f_re,f_im,sigma_diff,sigma_total,optical_rhs,cond";
    case Command::Add:
      return "lambda,step,N,d_re,d_im,xi_d_defect,dev_C,dev_kernel,dev_det,roundtrip,det_re,"
             "det_im,cond";
    case Command::Sweep:
      return "lambda,n_theta,n_phi,det_phase,det_modulus,sigma_total,unitarity_defect,cond";
  }
  return "";
}

namespace {

double parse_double(std::string_view text, std::string_view what) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (text.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw Error(ErrorKind::InvalidArgument,
                std::string(what) + ": '" + std::string(text) + "' is not a number");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

std::vector<double> parse_lambda(std::string_view text) {
  const auto parts = split(text, ':');
  std::vector<double> out;
  if (parts.size() == 1) {
    out.push_back(parse_double(parts[0], "--lambda"));
  } else if (parts.size() == 3) {
    const double a = parse_double(parts[0], "--lambda start");
    const double b = parse_double(parts[1], "--lambda stop");
    const double step = parse_double(parts[2], "--lambda step");
    if (!(step > 0.0)) throw Error(ErrorKind::InvalidArgument, "--lambda step must be positive");
    if (b < a) throw Error(ErrorKind::InvalidArgument, "--lambda range is empty");
    const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
    if (count > 1000000) throw Error(ErrorKind::InvalidArgument, "--lambda range is too long");
    for (std::size_t k = 0; k < count; ++k) out.push_back(a + static_cast<double>(k) * step);
  } else {
    throw Error(ErrorKind::InvalidArgument, "--lambda expects X or A:B:STEP");
  }
  for (double l : out) {
    if (!(l > 0.0)) throw Error(ErrorKind::NonpositiveEnergy, "--lambda values must be positive");
  }
  return out;
}

cplx parse_complex(std::string_view text) {
  const auto parts = split(text, ',');
  if (parts.size() == 1) return {parse_double(parts[0], "--z"), 0.0};
  if (parts.size() == 2) return {parse_double(parts[0], "--z"), parse_double(parts[1], "--z")};
  throw Error(ErrorKind::InvalidArgument, "--z expects \"re,im\"");
}

Vec3 parse_vec3(std::string_view text) {
  const auto parts = split(text, ',');
  if (parts.size() != 3) throw Error(ErrorKind::InvalidArgument, "--direction expects \"x,y,z\"");
  return {parse_double(parts[0], "--direction"), parse_double(parts[1], "--direction"),
          parse_double(parts[2], "--direction")};
}

GridResolution resolve_grid(const RunSpec& spec, double lambda, double diameter) {
  GridResolution res = default_resolution(lambda, diameter);
  if (spec.default_grid && !spec.default_grid->empty()) {
    const auto parts = split(*spec.default_grid, ',');
    if (parts.size() > 2) {
      throw Error(ErrorKind::InvalidResolution, "KS_DEFAULT_GRID expects NTHETA or NTHETA,NPHI");
    }
    const double nt = parse_double(parts[0], "KS_DEFAULT_GRID");
    res.n_theta = static_cast<int>(nt);
    res.n_phi = parts.size() == 2 ? static_cast<int>(parse_double(parts[1], "KS_DEFAULT_GRID"))
                                  : 2 * res.n_theta;
    if (nt != res.n_theta) throw Error(ErrorKind::InvalidResolution, "KS_DEFAULT_GRID must be integral");
  }
  if (spec.n_theta) {
    res.n_theta = *spec.n_theta;
    if (!spec.n_phi) res.n_phi = 2 * res.n_theta;
  }
  if (spec.n_phi) res.n_phi = *spec.n_phi;
  return res;
}

namespace {

// Per-energy work runs concurrently; results and errors are collected
// by index so the emitted order is always the order of `lambdas`.
template <typename R, typename F>
std::vector<R> map_energies(const std::vector<double>& lambdas, unsigned threads, F fn) {
  const std::size_t n = lambdas.size();
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        slots[i].emplace(fn(lambdas[i]));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned t = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  t = static_cast<unsigned>(std::min<std::size_t>(t, n));
  {
    std::vector<std::jthread> pool;
    for (unsigned k = 1; k < t; ++k) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::string_view header) : out_(out) { out_ << header << '\n'; }

  CsvWriter& cell(double v) { return raw(format_number(v)); }
  CsvWriter& cell(std::size_t v) { return raw(std::to_string(v)); }
  CsvWriter& cell(int v) { return raw(std::to_string(v)); }
  CsvWriter& cell(std::string_view v) { return raw(std::string(v)); }
  void end_row() {
    out_ << '\n';
    first_ = true;
  }

 private:
  CsvWriter& raw(const std::string& s) {
    if (!first_) out_ << ',';
    out_ << s;
    first_ = false;
    return *this;
  }

  std::ostream& out_;
  bool first_ = true;
};

std::string_view convention_name(CouplingConvention c) {
  return c == CouplingConvention::FourPi ? "4pi" : "1";
}

std::string_view extent_name(FamilyExtent e) {
  return e == FamilyExtent::Finite ? "finite" : "truncated";
}

void write_header(JsonWriter& js, Command command, const PointConfiguration& config) {
  js.key("command").value(to_string(command));
  js.key("N").value(config.size());
  js.key("convention").value(convention_name(config.coupling().convention()));
}

void write_grid(JsonWriter& js, const GridResolution& g) {
  js.key("grid").begin_object();
  js.key("n_theta").value(g.n_theta);
  js.key("n_phi").value(g.n_phi);
  js.end_object();
}

struct Context {
  const RunSpec& spec;
  const LoadedConfig& loaded;
  std::ostream& out;
};

void run_validate(const Context& ctx) {
  const PointConfiguration& config = ctx.loaded.config;
  const auto& sep = config.separation();
  const std::vector<std::size_t> orders = default_truncation_orders(config.size());
  const SummabilityReport rep =
      config.coupling().is_diagonal()
          ? check_summability(config.coupling().weights(), sep.delta, orders, ctx.loaded.extent)
          : check_summability(inverse_sqrt_abs(config.coupling().matrix()), sep.delta, orders,
                              ctx.loaded.extent);
  if (ctx.spec.format == OutputFormat::Csv) {
    CsvWriter csv(ctx.out, csv_columns(Command::Validate));
    for (std::size_t k = 0; k < rep.orders.size(); ++k) {
      csv.cell(rep.orders[k]).cell(rep.sum_b[k]).cell(rep.sum_b_over_delta[k]);
      csv.cell(to_string(rep.verdict)).cell(rep.tail_estimate).end_row();
    }
    return;
  }
  JsonWriter js(ctx.out);
  js.begin_object();
  write_header(js, Command::Validate, config);
  js.key("extent").value(extent_name(ctx.loaded.extent));
  js.key("diameter").value(config.diameter());
  js.key("separation").begin_object();
  js.key("d");
  if (sep.d) {
    js.value(*sep.d);
  } else {
    js.null();
  }
  js.key("delta").values(sep.delta);
  js.end_object();
  js.key("warnings").begin_array();
  for (const auto& w : config.warnings()) js.value(w);
  js.end_array();
  js.key("summability").begin_object();
  js.key("orders").begin_array();
  for (auto o : rep.orders) js.value(o);
  js.end_array();
  js.key("sum_b").values(rep.sum_b);
  js.key("sum_b_over_delta").values(rep.sum_b_over_delta);
  js.key("ratio_b").value(rep.ratio_b);
  js.key("ratio_b_over_delta").value(rep.ratio_b_over_delta);
  js.key("tail_estimate").value(rep.tail_estimate);
  js.key("verdict").value(to_string(rep.verdict));
  js.end_object();
  js.end_object();
  js.finish();
}

void run_qmat(const Context& ctx) {
  const PointConfiguration& config = ctx.loaded.config;
  std::optional<SpectralPoint> zp;
  if (ctx.spec.z) {
    if (ctx.spec.lambdas.size() > 0) {
      throw Error(ErrorKind::InvalidArgument, "qmat takes either --z or --lambda");
    }
    zp = SpectralPoint::interior(*ctx.spec.z);
  } else {
    if (ctx.spec.lambdas.size() != 1) {
      throw Error(ErrorKind::InvalidArgument, "qmat needs --z \"re,im\" or a single --lambda");
    }
    zp = SpectralPoint::boundary_plus(ctx.spec.lambdas[0]);
  }
  const CMatrix q = q_matrix(*zp, config);
  const double cond =
      linalg::condition_number(q + config.coupling().scale() * config.coupling().matrix());
  if (ctx.spec.format == OutputFormat::Csv) {
    CsvWriter csv(ctx.out, csv_columns(Command::Qmat));
    for (Eigen::Index m = 0; m < q.rows(); ++m) {
      for (Eigen::Index n = 0; n < q.cols(); ++n) {
        csv.cell(static_cast<std::size_t>(m)).cell(static_cast<std::size_t>(n));
        csv.cell(q(m, n).real()).cell(q(m, n).imag()).cell(cond).end_row();
      }
    }
    return;
  }
  JsonWriter js(ctx.out);
  js.begin_object();
  write_header(js, Command::Qmat, config);
  js.key("z").value(zp->z());
  js.key("sqrt_z").value(zp->sqrt_z());
  js.key("boundary").value(!zp->is_interior());
  js.key("cond").value(cond);
  js.key("entries").matrix(q);
  js.end_object();
  js.finish();
}

SMatrixData assemble(const Context& ctx, double lambda, const SphereGrid& grid) {
  return ctx.spec.scaled ? assemble_s_scaled(lambda, ctx.loaded.config, grid)
                         : assemble_s(lambda, ctx.loaded.config, grid);
}

Vec3 incoming(const RunSpec& spec) {
  const double norm = spec.direction.norm();
  if (!(norm > 0.0)) throw Error(ErrorKind::InvalidArgument, "--direction must be nonzero");
  return spec.direction / norm;
}

void require_energies(const RunSpec& spec) {
  if (spec.lambdas.empty()) throw Error(ErrorKind::InvalidArgument, "--lambda is required");
}

struct KernelSample {
  Vec3 n;
  Vec3 n_prime;
  cplx value;
};

struct SmatRow {
  double lambda;
  GridResolution grid;
  AssemblyPath path;
  cplx det;
  double defect;
  double cond;
  CMatrix C;
  CMatrix cayley;
  std::vector<KernelSample> samples;
};

void run_smat(const Context& ctx) {
  require_energies(ctx.spec);
  const Vec3 n_in = incoming(ctx.spec);
  const double diameter = ctx.loaded.config.diameter();
  const auto rows = map_energies<SmatRow>(ctx.spec.lambdas, ctx.spec.threads, [&](double lambda) {
    const GridResolution res = resolve_grid(ctx.spec, lambda, diameter);
    const SphereGrid grid = make_grid(res.n_theta, res.n_phi);
    const SMatrixData s = assemble(ctx, lambda, grid);
    SmatRow row{lambda, res, s.path, det_s(s), unitarity_defect(s, grid), s.cond, s.C,
                cayley_on_span(s), {}};
    for (int axis = 0; axis < 3; ++axis) {
      for (double sign : {1.0, -1.0}) {
        Vec3 n = Vec3::Zero();
        n(axis) = sign;
        row.samples.push_back({n, n_in, s_kernel(s, n, n_in)});
      }
    }
    return row;
  });
  if (ctx.spec.format == OutputFormat::Csv) {
    CsvWriter csv(ctx.out, csv_columns(Command::Smat));
    for (const auto& r : rows) {
      csv.cell(r.lambda).cell(ctx.loaded.config.size()).cell(r.grid.n_theta).cell(r.grid.n_phi);
      csv.cell(to_string(r.path)).cell(r.det.real()).cell(r.det.imag()).cell(r.defect);
      csv.cell(r.cond).end_row();
    }
    return;
  }
  JsonWriter js(ctx.out);
  js.begin_object();
  write_header(js, Command::Smat, ctx.loaded.config);
  js.key("results").begin_array();
  for (const auto& r : rows) {
    js.begin_object();
    js.key("lambda").value(r.lambda);
    write_grid(js, r.grid);
    js.key("path").value(to_string(r.path));
    js.key("cond").value(r.cond);
    js.key("unitarity_defect").value(r.defect);
    js.key("det").value(r.det);
    js.key("det_modulus").value(std::abs(r.det));
    js.key("det_phase").value(std::arg(r.det));
    js.key("C").matrix(r.C);
    js.key("cayley").matrix(r.cayley);
    js.key("kernel_samples").begin_array();
    for (const auto& k : r.samples) {
      js.begin_object();
      js.key("n").value(k.n);
      js.key("n_prime").value(k.n_prime);
      js.key("K").value(k.value);
      js.end_object();
    }
    js.end_array();
    js.end_object();
  }
  js.end_array();
  js.end_object();
  js.finish();
}

struct DetRow {
  double lambda;
  GridResolution grid;
  cplx det;
  double cond;
};

void run_dets(const Context& ctx) {
  require_energies(ctx.spec);
  const double diameter = ctx.loaded.config.diameter();
  const auto rows = map_energies<DetRow>(ctx.spec.lambdas, ctx.spec.threads, [&](double lambda) {
    const GridResolution res = resolve_grid(ctx.spec, lambda, diameter);
    const SMatrixData s = assemble(ctx, lambda, make_grid(res.n_theta, res.n_phi));
    return DetRow{lambda, res, det_s(s), s.cond};
  });
  if (ctx.spec.format == OutputFormat::Csv) {
    CsvWriter csv(ctx.out, csv_columns(Command::Dets));
    for (const auto& r : rows) {
      csv.cell(r.lambda).cell(r.det.real()).cell(r.det.imag()).cell(std::abs(r.det));
      csv.cell(std::arg(r.det)).cell(r.cond).end_row();
    }
    return;
  }
  JsonWriter js(ctx.out);
  js.begin_object();
  write_header(js, Command::Dets, ctx.loaded.config);
  js.key("results").begin_array();
  for (const auto& r : rows) {
    js.begin_object();
    js.key("lambda").value(r.lambda);
    js.key("det").value(r.det);
    js.key("det_modulus").value(std::abs(r.det));
    js.key("det_phase").value(std::arg(r.det));
    js.key("cond").value(r.cond);
    js.end_object();
  }
  js.end_array();
  js.end_object();
  js.finish();
}

struct XsectRow {
  double lambda;
  GridResolution grid;
  std::vector<Vec3> nodes;
  CrossSectionResult x;
};

void run_xsect(const Context& ctx) {
  require_energies(ctx.spec);
  const Vec3 n_in = incoming(ctx.spec);
  const double diameter = ctx.loaded.config.diameter();
  const auto rows = map_energies<XsectRow>(ctx.spec.lambdas, ctx.spec.threads, [&](double lambda) {
    const GridResolution res = resolve_grid(ctx.spec, lambda, diameter);
    const SphereGrid grid = make_grid(res.n_theta, res.n_phi);
    const SMatrixData s = assemble(ctx, lambda, grid);
    return XsectRow{lambda, res, grid.nodes(), cross_section(s, grid, n_in)};
  });
  if (ctx.spec.format == OutputFormat::Csv) {
    CsvWriter csv(ctx.out, csv_columns(Command::Xsect));
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const Vec3& n = r.nodes[i];
        csv.cell(r.lambda).cell(n(0)).cell(n(1)).cell(n(2));
        csv.cell(r.x.amplitude(ii).real()).cell(r.x.amplitude(ii).imag());
        csv.cell(r.x.sigma_diff(ii)).cell(r.x.sigma_total).cell(r.x.optical_rhs);
        csv.cell(r.x.cond).end_row();
      }
    }
    return;
  }
  JsonWriter js(ctx.out);
  js.begin_object();
  write_header(js, Command::Xsect, ctx.loaded.config);
  js.key("direction").value(n_in);
  js.key("results").begin_array();
  for (const auto& r : rows) {
    js.begin_object();
    js.key("lambda").value(r.lambda);
    write_grid(js, r.grid);
    js.key("cond").value(r.x.cond);
    js.key("sigma_total").value(r.x.sigma_total);
    js.key("optical_lhs").value(r.x.optical_lhs);
    js.key("optical_rhs").value(r.x.optical_rhs);
    js.key("nodes").begin_array();
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      js.begin_object();
      js.key("n").value(r.nodes[i]);
      js.key("f").value(cplx(r.x.amplitude(ii)));
      js.key("sigma_diff").value(r.x.sigma_diff(ii));
      js.end_object();
    }
    js.end_array();
    js.end_object();
  }
  js.end_array();
  js.end_object();
  js.finish();
}

struct AddStep {
  std::size_t step;
  cplx d;
  double xi_d_defect;
  double dev_c;
  double dev_kernel;
  double dev_det;
  double roundtrip;
  cplx det;
  double cond;
};

struct AddTrace {
  double lambda;
  GridResolution grid;
  std::vector<AddStep> steps;
};

void run_add(const Context& ctx) {
  require_energies(ctx.spec);
  const PointConfiguration& config = ctx.loaded.config;
  if (!config.coupling().is_diagonal()) {
    throw Error(ErrorKind::NonSymmetricCoupling, "add needs a diagonal coupling");
  }
  const std::vector<double> weights = config.coupling().weights();
  const CouplingConvention conv = config.coupling().convention();
  const double diameter = config.diameter();
  const auto traces = map_energies<AddTrace>(ctx.spec.lambdas, ctx.spec.threads, [&](double lambda) {
    const GridResolution res = resolve_grid(ctx.spec, lambda, diameter);
    const SphereGrid grid = make_grid(res.n_theta, res.n_phi);
    const auto m = static_cast<Eigen::Index>(grid.size());
    AddTrace trace{lambda, res, {}};
    IncrementalState state = IncrementalState::empty(lambda, conv);
    CMatrix kernel = CMatrix::Zero(m, m);
    cplx det = 1.0;
    for (std::size_t k = 0; k < config.size(); ++k) {
      IncrementalState next = add_point(state, config.points()[k], weights[k]);
      const UpdateData upd = update_data(next, grid);
      kernel = s_rank_one_update(kernel, upd, grid);
      det = det_recursion(det, upd, grid);

      const std::vector<Vec3> pts(config.points().begin(), config.points().begin() + static_cast<std::ptrdiff_t>(k + 1));
      const std::vector<double> ws(weights.begin(), weights.begin() + static_cast<std::ptrdiff_t>(k + 1));
      const SMatrixData direct =
          assemble_s(lambda, build_configuration(pts, CouplingOperator::diagonal(ws, conv)), grid);
      const cplx det_direct = det_s(direct);
      const IncrementalState back = remove_last_point(next);
      const double roundtrip =
          k == 0 ? 0.0
                 : (back.denominator_inverse() - state.denominator_inverse()).cwiseAbs().maxCoeff();
      const auto last = static_cast<Eigen::Index>(k);
      AddStep st;
      st.step = k + 1;
      st.d = upd.d;
      st.xi_d_defect = std::abs(next.denominator_inverse()(last, last) * upd.d - 1.0);
      st.dev_c = (next.denominator_inverse() - direct.C).cwiseAbs().maxCoeff();
      st.dev_kernel = (kernel - kernel_on_grid(direct, grid)).cwiseAbs().maxCoeff();
      st.dev_det = std::abs(det - det_direct) / std::abs(det_direct);
      st.roundtrip = roundtrip;
      st.det = det;
      st.cond = direct.cond;
      trace.steps.push_back(st);
      state = std::move(next);
    }
    return trace;
  });
  if (ctx.spec.format == OutputFormat::Csv) {
    CsvWriter csv(ctx.out, csv_columns(Command::Add));
    for (const auto& t : traces) {
      for (const auto& s : t.steps) {
        csv.cell(t.lambda).cell(s.step).cell(s.step).cell(s.d.real()).cell(s.d.imag());
        csv.cell(s.xi_d_defect).cell(s.dev_c).cell(s.dev_kernel).cell(s.dev_det);
        csv.cell(s.roundtrip).cell(s.det.real()).cell(s.det.imag()).cell(s.cond).end_row();
      }
    }
    return;
  }
  JsonWriter js(ctx.out);
  js.begin_object();
  write_header(js, Command::Add, config);
  js.key("rank_one_form").value(describe(kRankOneForm));
  js.key("det_recursion_form").value(describe(kDetRecursionForm));
  js.key("results").begin_array();
  for (const auto& t : traces) {
    js.begin_object();
    js.key("lambda").value(t.lambda);
    write_grid(js, t.grid);
    js.key("steps").begin_array();
    for (const auto& s : t.steps) {
      js.begin_object();
      js.key("step").value(s.step);
      js.key("d").value(s.d);
      js.key("xi_d_defect").value(s.xi_d_defect);
      js.key("dev_C").value(s.dev_c);
      js.key("dev_kernel").value(s.dev_kernel);
      js.key("dev_det").value(s.dev_det);
      js.key("roundtrip").value(s.roundtrip);
      js.key("det").value(s.det);
      js.key("cond").value(s.cond);
      js.end_object();
    }
    js.end_array();
    js.end_object();
  }
  js.end_array();
  js.end_object();
  js.finish();
}

struct SweepRow {
  double lambda;
  GridResolution grid;
  cplx det;
  double sigma_total;
  double defect;
  double cond;
};

void run_sweep(const Context& ctx) {
  require_energies(ctx.spec);
  const Vec3 n_in = incoming(ctx.spec);
  const double diameter = ctx.loaded.config.diameter();
  const auto rows = map_energies<SweepRow>(ctx.spec.lambdas, ctx.spec.threads, [&](double lambda) {
    const GridResolution res = resolve_grid(ctx.spec, lambda, diameter);
    const SphereGrid grid = make_grid(res.n_theta, res.n_phi);
    const SMatrixData s = assemble(ctx, lambda, grid);
    const CrossSectionResult x = cross_section(s, grid, n_in);
    return SweepRow{lambda, res, det_s(s), x.sigma_total, unitarity_defect(s, grid), s.cond};
  });
  if (ctx.spec.format == OutputFormat::Csv) {
    CsvWriter csv(ctx.out, csv_columns(Command::Sweep));
    for (const auto& r : rows) {
      csv.cell(r.lambda).cell(r.grid.n_theta).cell(r.grid.n_phi).cell(std::arg(r.det));
      csv.cell(std::abs(r.det)).cell(r.sigma_total).cell(r.defect).cell(r.cond).end_row();
    }
    return;
  }
  JsonWriter js(ctx.out);
  js.begin_object();
  write_header(js, Command::Sweep, ctx.loaded.config);
  js.key("direction").value(n_in);
  js.key("results").begin_array();
  for (const auto& r : rows) {
    js.begin_object();
    js.key("lambda").value(r.lambda);
    write_grid(js, r.grid);
    js.key("det_phase").value(std::arg(r.det));
    js.key("det_modulus").value(std::abs(r.det));
    js.key("sigma_total").value(r.sigma_total);
    js.key("unitarity_defect").value(r.defect);
    js.key("cond").value(r.cond);
    js.end_object();
  }
  js.end_array();
  js.end_object();
  js.finish();
}

void write_error(std::ostream& err, std::string_view kind, bool numerical,
                 std::string_view message) {
  JsonWriter js(err);
  js.begin_object();
  js.key("error").begin_object();
  js.key("kind").value(kind);
  js.key("category").value(numerical ? "numerical" : "input");
  js.key("message").value(message);
  js.end_object();
  js.end_object();
  js.finish();
}

}  // namespace

int run(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  try {
    if (spec.config_path.empty()) throw Error(ErrorKind::InvalidArgument, "--config is required");
    LoadedConfig loaded = load_config(spec.config_path);
    if (spec.convention) loaded.config = loaded.config.with_convention(*spec.convention);

    std::ostringstream buffer;
    const Context ctx{spec, loaded, buffer};
    switch (spec.command) {
      case Command::Validate: run_validate(ctx); break;
      case Command::Qmat: run_qmat(ctx); break;
      case Command::Smat: run_smat(ctx); break;
      case Command::Dets: run_dets(ctx); break;
      case Command::Xsect: run_xsect(ctx); break;
      case Command::Add: run_add(ctx); break;
      case Command::Sweep: run_sweep(ctx); break;
    }

    if (spec.out_path.empty()) {
      out << buffer.str();
      out.flush();
    } else {
      std::ofstream file(spec.out_path, std::ios::binary | std::ios::trunc);
      file << buffer.str();
      if (!file) throw Error(ErrorKind::InvalidArgument, spec.out_path + ": cannot write output");
    }
    return 0;
  } catch (const Error& e) {
    const bool numerical = is_numerical(e.kind());
    write_error(err, ks::to_string(e.kind()), numerical, e.what());
    return numerical ? 3 : 2;
  } catch (const std::exception& e) {
    write_error(err, "Internal", true, e.what());
    return 3;
  }
}

}  // namespace ks::cli
