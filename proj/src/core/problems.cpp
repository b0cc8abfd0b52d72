#include "simpl/problems.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "simpl/error.hpp"

namespace simpl {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) fail(ErrorCode::Config, message);
}

bool finite2(const std::array<double, 2>& v) { return std::isfinite(v[0]) && std::isfinite(v[1]); }

Polytope load_polytope_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open polytope file '" + path + "'");
  return read_polytope(in);
}

}  // namespace

void ProblemConfig::validate() const {
  require(name == kIsotropicCantilever || name == kOrthotropicCantilever, "unknown problem '" + name + "'");
  require(std::isfinite(lx) && lx > 0 && std::isfinite(ly) && ly > 0, "domain lengths must be positive");
  require(nx >= 1 && ny >= 1, "nx and ny must be at least 1");
  require(std::isfinite(filter_epsilon) && filter_epsilon >= 0, "filter_epsilon must be non-negative");
  require(finite2(load_center) && load_center[0] >= 0 && load_center[0] <= lx && load_center[1] >= 0 &&
              load_center[1] <= ly,
          "load_center must lie inside the domain");
  require(std::isfinite(load_radius) && load_radius >= 0, "load_radius must be non-negative");
  require(finite2(load_vector), "load_vector must be finite");
  require(!gamma_d.empty(), "at least one clamped edge is required");
  if (weights || bounds) {
    require(weights && bounds, "constraint weights and bounds must be given together");
    require(weights->rows() == bounds->size(), "one bound per constraint row is required");
    require(weights->allFinite() && bounds->allFinite(), "constraints must be finite");
  }
  if (p) require(std::isfinite(*p) && *p >= 1, "p must be at least 1");
  require(std::isfinite(nu) && nu > -1 && nu < 0.5, "nu must lie in (-1, 0.5)");
  if (name == kIsotropicCantilever) {
    require(youngs.size() >= 2, "at least two phases are required");
    for (double e : youngs) require(std::isfinite(e) && e > 0, "Young's moduli must be positive");
    if (!weights) {
      require(phase_bounds.size() + 1 == youngs.size(), "need one bound per non-void phase");
      for (double b : phase_bounds) require(std::isfinite(b), "bounds must be finite");
    }
  } else {
    require(std::isfinite(ex) && ex > 0 && std::isfinite(ey) && ey > 0, "Ex and Ey must be positive");
    require(std::isfinite(nu_xy) && nu_xy * nu_xy * ey / ex < 1, "nu_xy must satisfy nu_xy nu_yx < 1");
    require(std::isfinite(void_fraction) && void_fraction >= 0 && void_fraction < 1,
            "void_fraction must lie in [0, 1)");
    require(std::isfinite(floor_scale) && floor_scale > 0, "floor_scale must be positive");
    require(num_angles >= 3, "num_angles must be at least 3");
    if (p) {
      require(std::fmod(*p, 2.0) == 0.0 && *p >= 2, "orthotropic p must be an even integer >= 2");
    }
  }
  if (initial_latent) require(initial_latent->allFinite(), "initial_latent must be finite");
}

Problem::Problem(const ProblemConfig& cfg, Polytope polytope, GlobalConstraints constraints,
                 std::shared_ptr<const MaterialLaw> law)
    : name_(cfg.name),
      mesh_(cfg.lx, cfg.ly, cfg.nx, cfg.ny),
      polytope_(std::move(polytope)),
      constraints_(std::move(constraints)),
      psi0_(mesh_, polytope_.dim()),
      filter_(std::make_shared<FilterOperator>(mesh_, cfg.filter_epsilon, cfg.gamma_f)),
      law_(std::move(law)),
      load_cells_(select_disc_cells(mesh_, cfg.load_center, cfg.load_radius)),
      gamma_d_(cfg.gamma_d) {
  if (law_->channels() != polytope_.dim()) {
    fail(ErrorCode::Config, "polytope dimension does not match the material law");
  }
  if (constraints_.dim() != polytope_.dim()) {
    fail(ErrorCode::Config, "constraint rows do not match the polytope dimension");
  }
  load_ = body_force_load(mesh_, load_cells_, cfg.load_vector);
  if (!cfg.initial_latent_file.empty()) {
    psi0_ = read_latent_file(cfg.initial_latent_file, mesh_, polytope_.dim());
  } else if (cfg.initial_latent) {
    if (cfg.initial_latent->size() != polytope_.dim()) {
      fail(ErrorCode::Config, "initial_latent has the wrong number of entries");
    }
    psi0_ = constant_cell_field(mesh_, *cfg.initial_latent);
  }
  check_strict_feasibility(polytope_, constraints_, mesh_.area());
}

ComplianceResult Problem::evaluate(const CellField& eta) const {
  return compliance_and_gradient(*law_, eta, *filter_, load_, gamma_d_);
}

Objective Problem::objective() const {
  return [filter = filter_, law = law_, load = load_, gamma = gamma_d_](const CellField& eta) {
    ComplianceResult r = compliance_and_gradient(*law, eta, *filter, load, gamma);
    return Evaluation{r.value, std::move(r.gradient)};
  };
}

void Problem::set_psi0(CellField psi0) {
  if (!(psi0.mesh() == mesh_) || psi0.channels() != polytope_.dim()) {
    fail(ErrorCode::InvalidArgument, "initial latent has the wrong shape");
  }
  psi0_ = std::move(psi0);
}

Problem build_isotropic_cantilever(const ProblemConfig& input) {
  ProblemConfig cfg = input;
  cfg.name = kIsotropicCantilever;
  cfg.validate();
  IsoStack stack{cfg.youngs, cfg.nu, cfg.p.value_or(3.0)};
  stack.validate();
  const int q = static_cast<int>(cfg.youngs.size());
  Polytope polytope = cfg.polytope_file.empty() ? standard_simplex(q) : load_polytope_file(cfg.polytope_file);
  if (polytope.dim() != q) fail(ErrorCode::Config, "polytope dimension must equal the number of phases");
  GlobalConstraints constraints;
  if (cfg.weights) {
    constraints = GlobalConstraints(*cfg.weights, *cfg.bounds);
  } else {
    Matrix w = Matrix::Zero(q - 1, q);
    Vector b(q - 1);
    for (int i = 0; i < q - 1; ++i) {
      w(i, i + 1) = 1.0;
      b[i] = cfg.phase_bounds[i];
    }
    constraints = GlobalConstraints(w, b);
  }
  return Problem(cfg, std::move(polytope), std::move(constraints), std::make_shared<IsotropicSimpLaw>(stack));
}

Problem build_orthotropic_cantilever(const ProblemConfig& input) {
  ProblemConfig cfg = input;
  cfg.name = kOrthotropicCantilever;
  cfg.validate();
  OrthoSpec spec{cfg.ex, cfg.ey, cfg.nu_xy, cfg.p.value_or(4.0)};
  spec.validate();
  // Void is the apex (1, 0, 0); orientations sit on the opposite face.
  Polytope polytope = cfg.polytope_file.empty()
                          ? build_regular_polygon_with_apex(cfg.num_angles, true, Eigen::Vector3d(1, 0, 0),
                                                            ApexLayout::First)
                          : load_polytope_file(cfg.polytope_file);
  if (polytope.dim() != 3) fail(ErrorCode::Config, "orthotropic polytope must live in R^3");
  if (!polytope.full_dimensional()) fail(ErrorCode::Config, "orthotropic polytope must be full-dimensional");
  const double area = cfg.lx * cfg.ly;
  GlobalConstraints constraints = cfg.weights ? GlobalConstraints(*cfg.weights, *cfg.bounds)
                                              : GlobalConstraints(Matrix{{-1.0, 0.0, 0.0}},
                                                                  Vector::Constant(1, -cfg.void_fraction * area));
  if (!cfg.initial_latent && cfg.initial_latent_file.empty()) cfg.initial_latent = Vector{{0.0, 0.1, 0.0}};
  const Voigt3 floor = cfg.floor_scale * iso_voigt(1.0, cfg.nu);
  auto law = std::make_shared<OrthotropicLaw>(spec, Voigt3::Zero(), floor);
  return Problem(cfg, std::move(polytope), std::move(constraints), std::move(law));
}

Problem build_problem(const ProblemConfig& cfg) {
  if (cfg.name == kIsotropicCantilever) return build_isotropic_cantilever(cfg);
  if (cfg.name == kOrthotropicCantilever) return build_orthotropic_cantilever(cfg);
  fail(ErrorCode::Config, "unknown problem '" + cfg.name + "'");
}

void check_strict_feasibility(const Polytope& polytope, const GlobalConstraints& constraints, double area) {
  if (constraints.count() == 0) return;
  const Vector& b = constraints.bounds();
  const Vector at_centroid = area * (constraints.weights() * polytope.centroid());
  if (((b - at_centroid).array() > 0.0).all()) return;

  Vector tightened(b.size());
  for (Eigen::Index i = 0; i < b.size(); ++i) tightened[i] = b[i] - 1e-9 * std::max(1.0, std::abs(b[i]));
  const Mesh cell(area, 1.0, 1, 1);
  const CellField zero(cell, polytope.dim());
  try {
    const GlobalConstraints tight(constraints.weights(), tightened);
    ProjectionOptions opts;
    opts.tol = 1e-12;
    opts.max_sweeps = 5000;
    const ProjectionResult r = bregman_project(polytope, zero, tight, opts);
    const Vector values = constraint_values(polytope, r.psi, constraints);
    const double log_min = min_log_barycentric(polytope, r.psi);
    if (((b - values).array() > 0.0).all() && std::isfinite(log_min)) return;
    fail(ErrorCode::Infeasible, "constraints admit no strictly interior design",
         std::vector<double>(values.data(), values.data() + values.size()));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Infeasible) throw;
    fail(ErrorCode::Infeasible, std::string("constraints admit no strictly interior design: ") + e.what(), e.data());
  }
}

CellField read_latent_file(const std::string& path, const Mesh& mesh, int channels) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open latent file '" + path + "'");
  CellField psi(mesh, channels);
  std::string line;
  std::size_t cell = 0;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const std::string where = path + ":" + std::to_string(lineno) + ": ";
    if (cell >= mesh.cell_count()) fail(ErrorCode::Config, where + "more rows than cells");
    std::istringstream ls(line);
    for (int c = 0; c < channels; ++c) {
      double v = 0.0;
      if (!(ls >> v) || !std::isfinite(v)) fail(ErrorCode::Config, where + "expected " + std::to_string(channels) + " finite values");
      psi(cell, c) = v;
    }
    std::string extra;
    if (ls >> extra) fail(ErrorCode::Config, where + "too many values");
    ++cell;
  }
  if (cell != mesh.cell_count()) {
    fail(ErrorCode::Config, path + ": expected " + std::to_string(mesh.cell_count()) + " rows, found " +
                                std::to_string(cell));
  }
  return psi;
}

}  // namespace simpl
