#include "duality_bounds/constraints.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "duality_bounds/errors.hpp"

namespace duality_bounds {

namespace {

constexpr double kBlockDiagonalTolerance = 1e-12;
constexpr double kDuplicateTolerance = 1e-12;

void require_block_diagonal(const ScatteringProblem& p, const ComplexMatrix& m) {
  if (m.rows() != p.dim() || m.cols() != p.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "P does not match the problem dimension");
  }
  const double mass = p.partition().off_block_mass(m);
  if (mass > kBlockDiagonalTolerance) {
    std::ostringstream msg;
    msg << "P has relative off-block mass " << mass;
    throw Error(ErrorCode::NotBlockDiagonal, msg.str());
  }
}

// Frobenius distance between the (s, A) concatenations.
double form_distance(const QuadraticForm& a, const QuadraticForm& b) {
  return std::sqrt((a.s() - b.s()).squaredNorm() + (a.a() - b.a()).squaredNorm() +
                   (a.v() - b.v()) * (a.v() - b.v()));
}

bool is_duplicate(const std::vector<Constraint>& kept, const QuadraticForm& f) {
  const QuadraticForm neg = -f;
  for (const auto& c : kept) {
    if (form_distance(c.form, f) < kDuplicateTolerance ||
        form_distance(c.form, neg) < kDuplicateTolerance) {
      return true;
    }
  }
  return false;
}

}  // namespace

ConstraintSet::ConstraintSet(std::vector<Constraint> constraints, std::size_t compact_index)
    : constraints_(std::move(constraints)), compact_index_(compact_index) {
  if (constraints_.empty() || compact_index_ >= constraints_.size()) {
    throw Error(ErrorCode::InvalidInput, "constraint set needs a compact member");
  }
  const Eigen::Index n = constraints_.front().form.dim();
  for (const auto& c : constraints_) {
    if (c.form.dim() != n) {
      throw Error(ErrorCode::DimensionMismatch, "constraints disagree in dimension");
    }
  }
  if (constraints_[compact_index_].kind != ConstraintKind::Equality) {
    throw Error(ErrorCode::InvalidInput, "compact constraint must be an equality");
  }
  if (lambda_min(constraints_[compact_index_].form.a()) <= 0.0) {
    throw Error(ErrorCode::PassivityViolation,
                "compact constraint quadratic part is not positive definite");
  }
}

ConstraintSet ConstraintSet::with(Constraint c) const {
  auto next = constraints_;
  next.push_back(std::move(c));
  return ConstraintSet(std::move(next), compact_index_);
}

Constraint compact_constraint(const ScatteringProblem& p) {
  const Complex i(0.0, 1.0);
  const ComplexMatrix u = build_U(p);
  return {QuadraticForm(i * p.s() / 2.0, hermitian_part(i * u)), ConstraintKind::Equality,
          "compact"};
}

Constraint gen_constraint_simple(const ScatteringProblem& p, const ComplexMatrix& P) {
  require_block_diagonal(p, P);
  const ComplexMatrix u = p.Vinv() - p.G();
  return {QuadraticForm(P * p.s() / 2.0, hermitian_part(P * u)), ConstraintKind::Equality,
          "simple"};
}

Constraint gen_constraint_background(const ScatteringProblem& p, const ComplexMatrix& P,
                                     const Design& b) {
  require_block_diagonal(p, P);
  const BackgroundOperators ops = background_operators(p, b);
  const ComplexVector s_part = (ops.Wb_inv.adjoint() * P * ops.Vc * p.s() +
                                ops.Wc_inv.adjoint() * P.adjoint() * ops.Vb * p.s()) /
                               2.0;
  const ComplexMatrix a_part = hermitian_part(ops.Wb_inv.adjoint() * P * ops.Wc_inv);
  return {QuadraticForm(s_part, a_part), ConstraintKind::Equality,
          "background:" + b.to_string()};
}

Constraint normalize_constraint(const Constraint& c) {
  const double norm = hermitian_operator_norm(c.form.a());
  if (norm == 0.0) return c;
  return {c.form.scaled(1.0 / norm), c.kind, c.label};
}

ConstraintSet default_family(const ScatteringProblem& p,
                             const std::vector<Design>& backgrounds) {
  std::vector<Constraint> out;
  out.push_back(compact_constraint(p));
  std::vector<Constraint> kept;

  auto add = [&](Constraint c) {
    Constraint n = normalize_constraint(c);
    if (n.form.s().norm() == 0.0 && n.form.a().norm() == 0.0) return;
    if (is_duplicate(kept, n.form)) return;
    kept.push_back(n);
    out.push_back(std::move(n));
  };

  const Complex i(0.0, 1.0);
  for (int j = 0; j < p.num_blocks(); ++j) {
    const ComplexMatrix proj = p.partition().projector(j);
    const std::string tag = "block " + std::to_string(j);
    Constraint re = gen_constraint_simple(p, proj);
    re.label = "simple " + tag + " P=I";
    add(std::move(re));
    Constraint im = gen_constraint_simple(p, i * proj);
    im.label = "simple " + tag + " P=iI";
    add(std::move(im));
  }
  for (const auto& b : backgrounds) {
    for (int j = 0; j < p.num_blocks(); ++j) {
      const ComplexMatrix proj = p.partition().projector(j);
      const std::string tag = "b=" + b.to_string() + " block " + std::to_string(j);
      Constraint re = gen_constraint_background(p, proj, b);
      re.label = "background " + tag + " P=I";
      add(std::move(re));
      Constraint im = gen_constraint_background(p, i * proj, b);
      im.label = "background " + tag + " P=iI";
      add(std::move(im));
    }
  }
  return ConstraintSet(std::move(out), 0);
}

double constraint_scale(const QuadraticForm& f, const ComplexVector& t) {
  const double tn = t.norm();
  return f.s().norm() * tn + hermitian_operator_norm(f.a()) * tn * tn;
}

ValidityReport validate_on_designs(const ConstraintSet& cs, const ScatteringProblem& p,
                                   double tol) {
  ValidityReport report;
  report.tolerance = tol;
  std::vector<double> a_norms;
  for (const auto& c : cs.constraints()) a_norms.push_back(hermitian_operator_norm(c.form.a()));
  for (const auto& [rho, t] : enumerate_designs(p)) {
    ++report.designs_checked;
    const double tn = t.norm();
    for (std::size_t k = 0; k < cs.size(); ++k) {
      const QuadraticForm& f = cs[k].form;
      const double scale = f.s().norm() * tn + a_norms[k] * tn * tn;
      const double value = std::abs(f(t));
      const double normalized = scale > 0.0 ? value / scale : value;
      if (normalized > report.max_normalized || !report.worst_constraint) {
        if (normalized >= report.max_normalized) {
          report.max_normalized = normalized;
          report.worst_constraint = k;
          report.worst_design = rho;
        }
      }
    }
  }
  report.pass = report.max_normalized <= tol;
  return report;
}

}  // namespace duality_bounds
