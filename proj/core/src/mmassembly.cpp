#include "mmshape/mmassembly.hpp"

#include <cmath>
#include <set>

#include "mmshape/errors.hpp"

namespace mmshape {

void NitscheParams::validate() const {
  if (!(beta0 > 0.0)) throw InvalidArgument("NitscheParams: beta0 must be positive");
  if (!(beta1 >= 0.0)) throw InvalidArgument("NitscheParams: beta1 must be non-negative");
}

double ProblemSpec::lambda(int reg) const {
  auto it = conductivity.find(reg);
  if (it == conductivity.end()) throw InvalidArgument("ProblemSpec: no conductivity for region " + std::to_string(reg));
  return it->second;
}

double ProblemSpec::integrand(double t) const {
  if (functional == FunctionalKind::L2Squared) return t * t;
  return std::pow(std::abs(t), q) / q;
}

double ProblemSpec::integrand_derivative(double t) const {
  if (functional == FunctionalKind::L2Squared) return 2.0 * t;
  if (t == 0.0) return 0.0;
  return t * std::pow(std::abs(t), q - 2.0);
}

namespace {

void build_derived(MultiMeshStack& s) {
  const int n = static_cast<int>(s.reference.size());
  s.placed.clear();
  s.footprints.clear();
  for (int i = 0; i < n; ++i) {
    s.placed.push_back(apply_rigid(s.reference[i], s.poses[i]));
    s.footprints.push_back(footprint_polygon(s.placed.back()));
  }
  std::vector<const Mesh*> subs;
  for (const auto& m : s.placed) subs.push_back(&m);
  s.classification = classify_cells(s.background, s.footprints, subs);
  s.cut_quadrature = build_cut_quadrature(s.background, s.classification, 4);

  const PartitionReport rep = partition_report(s.background, s.classification);
  const double total = s.background.total_area();
  if (std::abs(rep.total() - total) > 1e-10 * std::max(1.0, total))
    throw ConsistencyError("build_stack: visible + hidden + covered area differs from the background area");

  s.segments.clear();
  s.overlaps.clear();
  if (n > 0) {
    const CellLocator bg_locator(s.background);
    for (int i = 0; i < n; ++i) {
      s.segments.push_back(interface_segments(s.placed[i], s.background, s.classification, bg_locator));
      s.overlaps.push_back(
          overlap_pieces(s.placed[i], s.background, s.classification, i, CellLocator(s.placed[i])));
    }
  }

  std::vector<std::vector<bool>> active;
  std::vector<bool> bg(s.background.num_vertices(), false);
  for (int c = 0; c < static_cast<int>(s.background.num_cells()); ++c)
    if (s.background_active(c))
      for (int v : s.background.cells()[c]) bg[v] = true;
  active.push_back(std::move(bg));
  for (const auto& m : s.placed) active.emplace_back(m.num_vertices(), true);
  s.dofs = DofMap(std::move(active));
}

std::array<int, 3> block_cell_dofs(const MultiMeshStack& s, int block, int cell) {
  const auto& t = s.mesh(block).cells()[cell];
  const int off = s.dofs.offset(block);
  return {t[0] + off, t[1] + off, t[2] + off};
}

// Hidden-part and full-cell rules of the cut cells at the requested degree.
struct CutRules {
  std::vector<int> index;  // background cell -> position in rules, -1 if not cut
  const std::vector<QuadratureRule>* full = nullptr;
  const std::vector<QuadratureRule>* hidden = nullptr;
  std::vector<QuadratureRule> own_full, own_hidden;
};

CutRules cut_rules(const MultiMeshStack& s, int degree) {
  CutRules r;
  r.index.assign(s.background.num_cells(), -1);
  const auto& cq = s.cut_quadrature;
  for (std::size_t k = 0; k < cq.cells.size(); ++k) r.index[cq.cells[k]] = static_cast<int>(k);
  if (cq.degree == degree) {
    r.full = &cq.full;
    r.hidden = &cq.hidden;
  } else {
    for (int c : cq.cells) {
      r.own_full.push_back(triangle_quadrature(s.background.triangle(c), degree));
      r.own_hidden.push_back(polygon_quadrature(s.classification.hidden[c], degree));
    }
    r.full = &r.own_full;
    r.hidden = &r.own_hidden;
  }
  return r;
}

std::set<int> boundary_markers(const Mesh& m) {
  std::set<int> out;
  for (int f = 0; f < static_cast<int>(m.num_facets()); ++f) {
    const int mk = m.facet_marker()[f];
    if (mk == 0 || mk == marker::kLambda || mk == marker::kInnerIface || mk == marker::kOuterIface) continue;
    if (m.facet_cells(f).size() == 1) out.insert(mk);
  }
  return out;
}

// Volume, interface and overlap blocks plus an explicit diagonal.
Assembler assemble_operator(const MultiMeshStack& s, const ProblemSpec& spec, const NitscheParams& params) {
  params.validate();
  Assembler asm_(s.dofs.size());
  for (int i = 0; i < s.dofs.size(); ++i) asm_.add(i, i, 0.0);
  assemble_visible_volume(asm_, s, spec, true);
  assemble_interface_penalty(asm_, s, spec, params);
  assemble_overlap_stab(asm_, s, spec, params);
  return asm_;
}

}  // namespace

MultiMeshStack build_stack(Mesh background, std::vector<Mesh> reference, std::vector<RigidPose> poses) {
  if (poses.empty()) poses.resize(reference.size());
  if (poses.size() != reference.size()) throw InvalidArgument("build_stack: one pose per submesh required");
  MultiMeshStack s;
  s.background = std::move(background);
  s.reference = std::move(reference);
  s.poses = std::move(poses);
  build_derived(s);
  return s;
}

MultiMeshStack rebuild_stack(const MultiMeshStack& stack, std::vector<RigidPose> poses) {
  return build_stack(stack.background, stack.reference, std::move(poses));
}

MultiMeshStack rebuild_stack(const MultiMeshStack& stack, std::vector<Mesh> reference, std::vector<RigidPose> poses) {
  return build_stack(stack.background, std::move(reference), std::move(poses));
}

void for_each_visible_point(const MultiMeshStack& s, int degree, const VisibleQuadratureFn& fn) {
  const CutRules rules = cut_rules(s, degree);
  const auto& cls = s.classification;
  for (int c = 0; c < static_cast<int>(s.background.num_cells()); ++c) {
    if (cls.status[c] == CellStatus::Covered) continue;
    const int k = rules.index[c];
    if (k < 0) {
      const auto rule = triangle_quadrature(s.background.triangle(c), degree);
      for (std::size_t q = 0; q < rule.size(); ++q) fn(0, c, rule.points[q], rule.weights[q]);
      continue;
    }
    const auto& full = (*rules.full)[k];
    const auto& hidden = (*rules.hidden)[k];
    for (std::size_t q = 0; q < full.size(); ++q) fn(0, c, full.points[q], full.weights[q]);
    for (std::size_t q = 0; q < hidden.size(); ++q) fn(0, c, hidden.points[q], -hidden.weights[q]);
  }
  for (int b = 1; b < s.num_blocks(); ++b) {
    const Mesh& m = s.mesh(b);
    for (int c = 0; c < static_cast<int>(m.num_cells()); ++c) {
      const auto rule = triangle_quadrature(m.triangle(c), degree);
      for (std::size_t q = 0; q < rule.size(); ++q) fn(b, c, rule.points[q], rule.weights[q]);
    }
  }
}

double integrate_visible(const MultiMeshStack& s, int degree,
                         const std::function<double(int, int, const Vec2&)>& fn) {
  double sum = 0.0;
  for_each_visible_point(s, degree, [&](int b, int c, const Vec2& p, double w) { sum += w * fn(b, c, p); });
  return sum;
}

double eval_block(const MultiMeshStack& s, const Field& u, int block, int cell, const Vec2& p) {
  return eval_in_cell(s.mesh(block), u, cell, p, s.dofs.offset(block));
}

Vec2 gradient_block(const MultiMeshStack& s, const Field& u, int block, int cell) {
  return cell_gradient(s.mesh(block), u, cell, s.dofs.offset(block));
}

Vector block_values(const MultiMeshStack& s, const Field& u, int block) {
  return u.segment(s.dofs.offset(block), s.dofs.block_size(block));
}

void assemble_visible_volume(Assembler& asm_, const MultiMeshStack& s, const ProblemSpec& spec, bool with_source) {
  const auto& cls = s.classification;
  const CutRules mass_rules = cut_rules(s, 4);

  for (int b = 0; b < s.num_blocks(); ++b) {
    const Mesh& m = s.mesh(b);
    for (int c = 0; c < static_cast<int>(m.num_cells()); ++c) {
      const bool cut = b == 0 && cls.status[c] == CellStatus::Cut;
      if (b == 0 && cls.status[c] == CellStatus::Covered) continue;
      const Triangle tri = m.triangle(c);
      const int reg = m.cell_region()[c];
      const auto dofs = block_cell_dofs(s, b, c);
      auto k = p1_stiffness(tri, spec.lambda(reg));
      auto mass = p1_mass(tri);
      if (cut) {
        const double frac = 1.0 - cls.hidden[c].area() / m.cell_area(c);
        for (auto& row : k)
          for (auto& v : row) v *= frac;
        const auto& hidden = (*mass_rules.hidden)[mass_rules.index[c]];
        for (std::size_t q = 0; q < hidden.size(); ++q) {
          const auto phi = barycentric(tri, hidden.points[q]);
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) mass[i][j] -= hidden.weights[q] * phi[i] * phi[j];
        }
      }
      if (spec.reaction != 0.0)
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) k[i][j] -= spec.reaction * mass[i][j];
      asm_.add_symmetric(dofs, k);
    }
  }

  if (!with_source || !spec.source) return;
  for_each_visible_point(s, spec.source_degree, [&](int b, int c, const Vec2& p, double w) {
    const Mesh& m = s.mesh(b);
    const double fv = spec.source(p, m.cell_region()[c]) * w;
    if (fv == 0.0) return;
    const auto phi = barycentric(m.triangle(c), p);
    const auto dofs = block_cell_dofs(s, b, c);
    for (int a = 0; a < 3; ++a) asm_.add_rhs(dofs[a], fv * phi[a]);
  });
}

void assemble_interface_penalty(Assembler& asm_, const MultiMeshStack& s, const ProblemSpec& spec,
                                const NitscheParams& params, InterfaceTerms terms) {
  for (int i = 0; i < s.num_submeshes(); ++i) {
    const int b = i + 1;
    const Mesh& sub = s.mesh(b);
    for (const auto& seg : s.segments[i]) {
      const Triangle t1 = sub.triangle(seg.submesh_cell);
      const Triangle t0 = s.background.triangle(seg.background_cell);
      const auto g1 = p1_gradients(t1);
      const auto g0 = p1_gradients(t0);
      const double lam = spec.lambda(sub.cell_region()[seg.submesh_cell]);
      const double pen = params.beta0 * lam / seg.h;
      const auto d1 = block_cell_dofs(s, b, seg.submesh_cell);
      const auto d0 = block_cell_dofs(s, 0, seg.background_cell);
      const std::array<int, 6> dofs{d1[0], d1[1], d1[2], d0[0], d0[1], d0[2]};

      std::array<double, 6> flux{};
      for (int a = 0; a < 3; ++a) {
        flux[a] = 0.5 * lam * seg.normal.dot(g1[a]);
        flux[a + 3] = 0.5 * lam * seg.normal.dot(g0[a]);
      }
      std::array<std::array<double, 6>, 6> local{};
      const auto rule = segment_gauss2(seg.a, seg.b);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const auto p1 = barycentric(t1, rule.points[q]);
        const auto p0 = barycentric(t0, rule.points[q]);
        const std::array<double, 6> jump{p1[0], p1[1], p1[2], -p0[0], -p0[1], -p0[2]};
        const double w = rule.weights[q];
        for (int a = 0; a < 6; ++a)
          for (int c = a; c < 6; ++c) {
            double v = 0.0;
            if (terms.consistency) v -= flux[a] * jump[c] + jump[a] * flux[c];
            if (terms.penalty) v += pen * jump[a] * jump[c];
            local[a][c] += w * v;
          }
      }
      for (int a = 0; a < 6; ++a)
        for (int c = 0; c < a; ++c) local[a][c] = local[c][a];
      asm_.add_symmetric(dofs, local);
    }
  }
}

void assemble_overlap_stab(Assembler& asm_, const MultiMeshStack& s, const ProblemSpec& spec,
                           const NitscheParams& params) {
  if (params.beta1 == 0.0) return;
  for (int i = 0; i < s.num_submeshes(); ++i) {
    const int b = i + 1;
    const Mesh& sub = s.mesh(b);
    for (const auto& piece : s.overlaps[i]) {
      const auto g1 = p1_gradients(sub.triangle(piece.submesh_cell));
      const auto g0 = p1_gradients(s.background.triangle(piece.background_cell));
      const double lam = spec.lambda(sub.cell_region()[piece.submesh_cell]);
      const double scale = params.beta1 * lam * piece.polygon.area();
      const auto d1 = block_cell_dofs(s, b, piece.submesh_cell);
      const auto d0 = block_cell_dofs(s, 0, piece.background_cell);
      const std::array<int, 6> dofs{d1[0], d1[1], d1[2], d0[0], d0[1], d0[2]};
      const std::array<Vec2, 6> jump{g1[0], g1[1], g1[2], -g0[0], -g0[1], -g0[2]};
      std::array<std::array<double, 6>, 6> local{};
      for (int a = 0; a < 6; ++a)
        for (int c = a; c < 6; ++c) local[a][c] = local[c][a] = scale * jump[a].dot(jump[c]);
      asm_.add_symmetric(dofs, local);
    }
  }
}

SparseSystem assemble_state(const MultiMeshStack& s, const ProblemSpec& spec, const NitscheParams& params) {
  for (int b = 0; b < s.num_blocks(); ++b)
    for (int mk : boundary_markers(s.mesh(b)))
      if (!spec.bcs.count(mk))
        throw ConfigError("assemble_state: no boundary condition for marker " + std::to_string(mk));

  Assembler asm_ = assemble_operator(s, spec, params);
  SparseSystem sys;
  for (int b = 0; b < s.num_blocks(); ++b) {
    const Mesh& m = s.mesh(b);
    for (const auto& [mk, bc] : spec.bcs) {
      if (bc.kind == BoundaryCondition::Kind::Robin) assemble_robin(asm_, m, mk, 1.0, bc.t_ex, s.dofs.offset(b));
    }
  }
  sys.matrix = asm_.matrix();
  sys.rhs = asm_.rhs();
  for (int b = 0; b < s.num_blocks(); ++b) {
    const Mesh& m = s.mesh(b);
    for (const auto& [mk, bc] : spec.bcs)
      if (bc.kind == BoundaryCondition::Kind::Dirichlet) {
        if (!bc.value) throw ConfigError("assemble_state: Dirichlet condition without data");
        add_dirichlet(sys, m, mk, bc.value, s.dofs.offset(b));
      }
  }
  for (int d : s.dofs.inactive_dofs()) sys.constraints[d] = 0.0;
  apply_dirichlet(sys);
  return sys;
}

namespace {

Vector adjoint_load(const MultiMeshStack& s, const ProblemSpec& spec, const Field& state) {
  Vector rhs = Vector::Zero(s.dofs.size());
  for_each_visible_point(s, 4, [&](int b, int c, const Vec2& p, double w) {
    const Mesh& m = s.mesh(b);
    const double t = eval_block(s, state, b, c, p);
    const double jd = spec.integrand_derivative(t);
    if (jd == 0.0) return;
    const auto phi = barycentric(m.triangle(c), p);
    const auto dofs = block_cell_dofs(s, b, c);
    for (int a = 0; a < 3; ++a) rhs[dofs[a]] -= w * jd * phi[a];
  });
  return rhs;
}

}  // namespace

SparseSystem assemble_adjoint(const MultiMeshStack& s, const ProblemSpec& spec, const NitscheParams& params,
                              const Field& state) {
  SparseSystem sys = assemble_state(s, spec, params);
  sys.rhs = adjoint_load(s, spec, state);
  for (auto& [dof, v] : sys.constraints) {
    v = 0.0;
    sys.rhs[dof] = 0.0;
  }
  return sys;
}

Field solve_state(const MultiMeshStack& s, const ProblemSpec& spec, const NitscheParams& params) {
  const SparseSystem sys = assemble_state(s, spec, params);
  return SpdFactorization(sys.matrix).solve(sys.rhs);
}

StateAdjoint solve_state_adjoint(const MultiMeshStack& s, const ProblemSpec& spec, const NitscheParams& params,
                                 bool with_adjoint) {
  const SparseSystem sys = assemble_state(s, spec, params);
  const SpdFactorization fac(sys.matrix);
  StateAdjoint out;
  out.state = fac.solve(sys.rhs);
  out.functional = eval_functional(s, spec, out.state);
  if (with_adjoint) {
    Vector rhs = adjoint_load(s, spec, out.state);
    for (const auto& [dof, v] : sys.constraints) rhs[dof] = 0.0;
    out.adjoint = fac.solve(rhs);
  }
  return out;
}

double eval_functional(const MultiMeshStack& s, const ProblemSpec& spec, const Field& state) {
  return integrate_visible(s, 4, [&](int b, int c, const Vec2& p) {
    return spec.integrand(eval_block(s, state, b, c, p));
  });
}

double l2_error(const MultiMeshStack& s, const Field& u, const ScalarFunction& exact, int degree) {
  const double e2 = integrate_visible(s, degree, [&](int b, int c, const Vec2& p) {
    const double d = eval_block(s, u, b, c, p) - exact(p);
    return d * d;
  });
  return std::sqrt(std::max(0.0, e2));
}

Field interpolate(const MultiMeshStack& s, const ScalarFunction& f) {
  Field u(s.dofs.size());
  for (int b = 0; b < s.num_blocks(); ++b) u.segment(s.dofs.offset(b), s.dofs.block_size(b)) = interpolate(s.mesh(b), f);
  return u;
}

}  // namespace mmshape
