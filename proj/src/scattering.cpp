#include "duality_bounds/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "duality_bounds/errors.hpp"
#include "duality_bounds/quadratic_form.hpp"

namespace duality_bounds {

namespace {

constexpr double kDesignConditionCap = 1e14;
constexpr double kDesignResidualTolerance = 1e-10;

void check_design(const ScatteringProblem& p, const Design& rho) {
  if (rho.size() != p.num_blocks()) {
    std::ostringstream msg;
    msg << "design has " << rho.size() << " entries, problem has " << p.num_blocks()
        << " blocks";
    throw Error(ErrorCode::InvalidDesign, msg.str());
  }
}

}  // namespace

DesignPartition::DesignPartition(Eigen::Index dim,
                                 std::vector<std::vector<Eigen::Index>> blocks)
    : dim_(dim), blocks_(std::move(blocks)), owner_(static_cast<std::size_t>(dim), -1) {
  if (dim <= 0) throw Error(ErrorCode::InvalidPartition, "dimension must be positive");
  if (blocks_.empty()) throw Error(ErrorCode::InvalidPartition, "partition has no blocks");
  for (std::size_t j = 0; j < blocks_.size(); ++j) {
    if (blocks_[j].empty()) {
      throw Error(ErrorCode::InvalidPartition, "partition contains an empty block");
    }
    for (Eigen::Index i : blocks_[j]) {
      if (i < 0 || i >= dim) {
        throw Error(ErrorCode::InvalidPartition, "block index out of range");
      }
      if (owner_[i] != -1) {
        throw Error(ErrorCode::InvalidPartition, "blocks are not disjoint");
      }
      owner_[i] = static_cast<int>(j);
    }
  }
  if (std::find(owner_.begin(), owner_.end(), -1) != owner_.end()) {
    throw Error(ErrorCode::InvalidPartition, "blocks do not cover the index range");
  }
}

DesignPartition DesignPartition::contiguous(Eigen::Index dim, int num_blocks) {
  if (num_blocks < 1 || num_blocks > dim) {
    std::ostringstream msg;
    msg << "cannot split dimension " << dim << " into " << num_blocks
        << " contiguous blocks";
    throw Error(ErrorCode::InvalidPartition, msg.str());
  }
  std::vector<std::vector<Eigen::Index>> blocks(num_blocks);
  const Eigen::Index base = dim / num_blocks;
  const Eigen::Index extra = dim % num_blocks;
  Eigen::Index next = 0;
  for (int j = 0; j < num_blocks; ++j) {
    const Eigen::Index len = base + (j < extra ? 1 : 0);
    for (Eigen::Index k = 0; k < len; ++k) blocks[j].push_back(next++);
  }
  return DesignPartition(dim, std::move(blocks));
}

ComplexMatrix DesignPartition::projector(int j) const {
  ComplexMatrix p = ComplexMatrix::Zero(dim_, dim_);
  for (Eigen::Index i : block(j)) p(i, i) = 1.0;
  return p;
}

double DesignPartition::off_block_mass(const ComplexMatrix& m) const {
  const double total = m.norm();
  if (total == 0.0) return 0.0;
  double off = 0.0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (owner_[r] != owner_[c]) off += std::norm(m(r, c));
    }
  }
  return std::sqrt(off) / total;
}

Design::Design(std::vector<std::uint8_t> rho) : rho_(std::move(rho)) {
  for (auto bit : rho_) {
    if (bit > 1) throw Error(ErrorCode::InvalidDesign, "design entries must be 0 or 1");
  }
}

Design Design::from_index(std::uint64_t index, int num_blocks) {
  std::vector<std::uint8_t> rho(num_blocks);
  for (int j = 0; j < num_blocks; ++j) {
    rho[j] = static_cast<std::uint8_t>((index >> (num_blocks - 1 - j)) & 1U);
  }
  return Design(std::move(rho));
}

Design Design::from_string(const std::string& bits) {
  std::vector<std::uint8_t> rho;
  for (char c : bits) {
    if (c != '0' && c != '1') {
      throw Error(ErrorCode::InvalidDesign, "design string must contain only 0 and 1");
    }
    rho.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return Design(std::move(rho));
}

bool Design::any() const {
  return std::any_of(rho_.begin(), rho_.end(), [](auto b) { return b != 0; });
}

std::string Design::to_string() const {
  std::string out;
  for (auto bit : rho_) out.push_back(bit ? '1' : '0');
  return out;
}

ScatteringProblem::ScatteringProblem(ComplexMatrix g, ComplexVector v_diagonal,
                                     DesignPartition partition, ComplexVector s,
                                     double eps_passivity, std::uint64_t seed)
    : g_(std::move(g)),
      v_diag_(std::move(v_diagonal)),
      partition_(std::move(partition)),
      s_(std::move(s)),
      eps_passivity_(eps_passivity),
      seed_(seed) {
  const Eigen::Index n = g_.rows();
  if (g_.cols() != n || v_diag_.size() != n || s_.size() != n ||
      partition_.dim() != n) {
    throw Error(ErrorCode::DimensionMismatch, "scattering problem operands disagree in size");
  }
  if (!g_.allFinite() || !v_diag_.allFinite() || !s_.allFinite()) {
    throw Error(ErrorCode::InvalidInput, "scattering problem has non-finite entries");
  }
  if (!(eps_passivity_ > 0.0)) {
    throw Error(ErrorCode::PassivityViolation, "eps_passivity must be positive");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(v_diag_(i)) == 0.0) {
      throw Error(ErrorCode::InvalidInput, "all-on potential must be nonzero everywhere");
    }
  }
  // Block passivity: (i D_j)^h restricted to d_j. D_j is diagonal here, so the
  // eigenvalues are -Im(1/v_i) for i in d_j.
  for (int j = 0; j < partition_.num_blocks(); ++j) {
    double block_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index i : partition_.block(j)) {
      block_min = std::min(block_min, -std::imag(1.0 / v_diag_(i)));
    }
    if (!(block_min > eps_passivity_)) {
      std::ostringstream msg;
      msg << "block " << j << " has lambda_min((i D_j)^h) = " << block_min
          << " <= eps_passivity = " << eps_passivity_;
      throw Error(ErrorCode::PassivityViolation, msg.str());
    }
  }
  const ComplexMatrix u = Vinv() - g_;
  resistive_lambda_min_ = lambda_min(hermitian_part(Complex(0.0, 1.0) * u));
  if (!(resistive_lambda_min_ > eps_passivity_)) {
    std::ostringstream msg;
    msg << "lambda_min((iU)^h) = " << resistive_lambda_min_
        << " <= eps_passivity = " << eps_passivity_;
    throw Error(ErrorCode::PassivityViolation, msg.str());
  }
}

ComplexMatrix ScatteringProblem::V() const { return v_diag_.asDiagonal(); }

ComplexMatrix ScatteringProblem::Vinv() const {
  return v_diag_.cwiseInverse().asDiagonal();
}

ScatteringProblem build_toy_problem(Eigen::Index dim, int num_blocks, double loss,
                                    double coupling, std::uint64_t seed) {
  if (dim <= 0) throw Error(ErrorCode::InvalidInput, "dimension must be positive");
  if (!(loss > 0.0)) {
    std::ostringstream msg;
    msg << "loss " << loss << " gives lambda_min((i D_j)^h) = " << loss
        << ", passivity requires a strictly positive loss";
    throw Error(ErrorCode::PassivityViolation, msg.str());
  }
  DesignPartition partition = DesignPartition::contiguous(dim, num_blocks);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  RealMatrix k = RealMatrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) k(i, i) = 0.5 + unit(rng);
  for (Eigen::Index i = 0; i + 1 < dim; ++i) {
    const double off = 0.3 + 0.7 * unit(rng);
    k(i, i + 1) = off;
    k(i + 1, i) = off;
  }
  Eigen::SelfAdjointEigenSolver<RealMatrix> kes(k, Eigen::EigenvaluesOnly);
  const double knorm = std::max(std::abs(kes.eigenvalues()(0)),
                                std::abs(kes.eigenvalues()(dim - 1)));
  // Radiative damping: -(i G)^h = gamma K^2 is positive semidefinite for any
  // gamma >= 0, so passivity only depends on the material loss.
  const double gamma = 0.25 / (knorm * knorm);
  const RealMatrix k2 = k * k;
  ComplexMatrix g(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      g(r, c) = Complex(coupling * k(r, c), gamma * k2(r, c));
    }
  }

  const Complex v = 1.0 / Complex(1.0, -loss);
  ComplexVector v_diag = ComplexVector::Constant(dim, v);

  ComplexVector s(dim);
  for (Eigen::Index i = 0; i < dim; ++i) s(i) = Complex(normal(rng), normal(rng));
  s /= s.norm();

  return ScatteringProblem(std::move(g), std::move(v_diag), std::move(partition),
                           std::move(s), 0.5 * loss, seed);
}

ComplexVector solve_design(const ScatteringProblem& p, const Design& rho) {
  check_design(p, rho);
  const Eigen::Index n = p.dim();
  std::vector<Eigen::Index> active;
  for (int j = 0; j < p.num_blocks(); ++j) {
    if (rho[j]) {
      const auto& blk = p.partition().block(j);
      active.insert(active.end(), blk.begin(), blk.end());
    }
  }
  ComplexVector t = ComplexVector::Zero(n);
  if (active.empty()) return t;
  std::sort(active.begin(), active.end());

  const auto m = static_cast<Eigen::Index>(active.size());
  ComplexMatrix op(m, m);
  ComplexVector rhs(m);
  const ComplexVector vinv = p.v_diagonal().cwiseInverse();
  for (Eigen::Index r = 0; r < m; ++r) {
    rhs(r) = p.s()(active[r]);
    for (Eigen::Index c = 0; c < m; ++c) op(r, c) = -p.G()(active[r], active[c]);
    op(r, r) += vinv(active[r]);
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(op);
  const auto& sv = svd.singularValues();
  const double cond = sv(m - 1) > 0.0 ? sv(0) / sv(m - 1)
                                      : std::numeric_limits<double>::infinity();
  if (!(cond <= kDesignConditionCap)) {
    std::ostringstream msg;
    msg << "design " << rho.to_string() << " has condition number " << cond;
    throw Error(ErrorCode::SingularDesignOperator, msg.str());
  }
  const ComplexVector tr = op.fullPivLu().solve(rhs);
  const double residual = (op * tr - rhs).norm();
  if (residual > kDesignResidualTolerance * rhs.norm()) {
    std::ostringstream msg;
    msg << "design " << rho.to_string() << " solve residual " << residual;
    throw Error(ErrorCode::SingularDesignOperator, msg.str());
  }
  for (Eigen::Index r = 0; r < m; ++r) t(active[r]) = tr(r);
  return t;
}

DesignRange::iterator::iterator(const ScatteringProblem* p, std::uint64_t index,
                                std::uint64_t end)
    : p_(p), index_(index), end_(end) {
  load();
}

DesignRange::iterator& DesignRange::iterator::operator++() {
  ++index_;
  load();
  return *this;
}

void DesignRange::iterator::load() {
  if (p_ == nullptr || index_ >= end_) return;
  Design rho = Design::from_index(index_, p_->num_blocks());
  ComplexVector t = solve_design(*p_, rho);
  current_ = {std::move(rho), std::move(t)};
}

DesignRange::DesignRange(const ScatteringProblem& p) : p_(&p) {
  if (p.num_blocks() > kMaxEnumerationBlocks) {
    std::ostringstream msg;
    msg << "enumeration capped at J = " << kMaxEnumerationBlocks << ", problem has J = "
        << p.num_blocks();
    throw Error(ErrorCode::EnumerationCap, msg.str());
  }
  count_ = std::uint64_t{1} << p.num_blocks();
}

DesignRange enumerate_designs(const ScatteringProblem& p) { return DesignRange(p); }

BackgroundOperators background_operators(const ScatteringProblem& p, const Design& b) {
  check_design(p, b);
  const Eigen::Index n = p.dim();
  ComplexVector vb = ComplexVector::Zero(n);
  ComplexVector vc = ComplexVector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (b[p.partition().block_of(i)]) {
      vb(i) = p.v_diagonal()(i);
    } else {
      vc(i) = p.v_diagonal()(i);
    }
  }
  BackgroundOperators ops;
  ops.Vb = vb.asDiagonal();
  ops.Vc = vc.asDiagonal();
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  ops.Wb_inv = id - ops.Vb * p.G();
  ops.Wc_inv = id - ops.Vc * p.G();
  return ops;
}

ComplexMatrix build_U(const ScatteringProblem& p) {
  ComplexMatrix u = p.Vinv() - p.G();
  const double lmin = lambda_min(hermitian_part(Complex(0.0, 1.0) * u));
  if (!(lmin > p.eps_passivity())) {
    std::ostringstream msg;
    msg << "lambda_min((iU)^h) = " << lmin << " <= eps_passivity";
    throw Error(ErrorCode::PassivityViolation, msg.str());
  }
  return u;
}

}  // namespace duality_bounds
