#include "nashbo/gp.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "nashbo/errors.hpp"

namespace nashbo {

namespace {

bool factor_ok(const Eigen::MatrixXd& L) {
  const auto d = L.diagonal();
  return d.allFinite() && (d.array() > 0.0).all();
}

double next_jitter(double jitter) { return jitter * 10.0; }

bool within_ceiling(double jitter, double signal_variance) {
  return jitter <= kJitterCeiling * signal_variance * (1.0 + 1e-9);
}

}  // namespace

SurrogateModel::SurrogateModel(std::size_t dim, KernelParams params, bool center_targets)
    : dim_(dim), params_(std::move(params)), center_(center_targets) {
  params_.validate(dim_);
  jitter_ = kJitterBase * params_.signal_variance;
  inputs_.resize(0, static_cast<Eigen::Index>(dim_));
}

SurrogateModel SurrogateModel::build(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                                     KernelParams params, bool center_targets) {
  if (inputs.rows() != targets.size()) throw LogicError("inputs and targets differ in length");
  SurrogateModel m(static_cast<std::size_t>(inputs.cols()), std::move(params), center_targets);
  m.inputs_ = inputs;
  m.targets_ = targets;
  m.refactor();
  return m;
}

SurrogateModel SurrogateModel::with_params(KernelParams params) const {
  return build(inputs_, targets_, std::move(params), center_);
}

void SurrogateModel::reserve(std::size_t rows) {
  if (static_cast<std::size_t>(factor_.rows()) >= rows) return;
  const std::size_t cap = std::max<std::size_t>(rows, 2 * static_cast<std::size_t>(factor_.rows()) + 8);
  Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(cap, cap);
  const auto t = static_cast<Eigen::Index>(size());
  if (t > 0) grown.topLeftCorner(t, t) = factor_.topLeftCorner(t, t);
  factor_ = std::move(grown);
}

void SurrogateModel::refactor() {
  const auto t = static_cast<Eigen::Index>(size());
  offset_ = (center_ && t > 0) ? targets_.mean() : 0.0;
  if (t == 0) {
    solved_.resize(0);
    return;
  }
  const Eigen::MatrixXd K = gram(params_, inputs_);
  while (true) {
    Eigen::MatrixXd A = K;
    A.diagonal().array() += params_.noise_variance + jitter_;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    Eigen::MatrixXd L = llt.matrixL();
    if (llt.info() == Eigen::Success && factor_ok(L)) {
      factor_ = Eigen::MatrixXd::Zero(t + 8, t + 8);
      factor_.topLeftCorner(t, t) = L;
      break;
    }
    const double bumped = next_jitter(jitter_);
    if (!within_ceiling(bumped, params_.signal_variance)) {
      throw ModelError("kernel matrix is not positive definite even at the maximum jitter");
    }
    jitter_ = bumped;
    ++escalations_;
  }
  recompute_solved();
}

void SurrogateModel::recompute_solved() {
  const auto t = static_cast<Eigen::Index>(size());
  solved_ = targets_.array() - offset_;
  factor_.topLeftCorner(t, t).triangularView<Eigen::Lower>().solveInPlace(solved_);
}

void SurrogateModel::update(const Eigen::VectorXd& x, double y) {
  if (static_cast<std::size_t>(x.size()) != dim_) throw LogicError("input dimension mismatch");
  const auto t = static_cast<Eigen::Index>(size());

  Eigen::VectorXd border;
  double pivot = -1.0;
  if (t > 0) {
    border = cross_kernel(params_, inputs_, x.transpose());
    factor_.topLeftCorner(t, t).triangularView<Eigen::Lower>().solveInPlace(border);
    pivot = params_.signal_variance + params_.noise_variance + jitter_ - border.squaredNorm();
  } else {
    pivot = params_.signal_variance + params_.noise_variance + jitter_;
  }

  if (!(pivot > 0.0) || !std::isfinite(pivot)) {
    // Bordering broke down: refactor everything at a higher jitter.
    SurrogateModel next = *this;
    next.inputs_.conservativeResize(t + 1, Eigen::NoChange);
    next.inputs_.row(t) = x.transpose();
    next.targets_.conservativeResize(t + 1);
    next.targets_(t) = y;
    next.jitter_ = next_jitter(jitter_);
    ++next.escalations_;
    if (!within_ceiling(next.jitter_, params_.signal_variance)) {
      throw ModelError("kernel matrix is not positive definite even at the maximum jitter");
    }
    next.refactor();
    *this = std::move(next);
    return;
  }

  reserve(static_cast<std::size_t>(t + 1));
  inputs_.conservativeResize(t + 1, Eigen::NoChange);
  inputs_.row(t) = x.transpose();
  targets_.conservativeResize(t + 1);
  targets_(t) = y;
  const double diag = std::sqrt(pivot);
  if (t > 0) factor_.row(t).head(t) = border.transpose();
  factor_(t, t) = diag;

  if (center_) {
    offset_ = targets_.mean();
    recompute_solved();
  } else {
    solved_.conservativeResize(t + 1);
    const double dot = t > 0 ? border.dot(solved_.head(t)) : 0.0;
    solved_(t) = (y - dot) / diag;
  }
}

Eigen::VectorXd SurrogateModel::solved_targets() const { return solved_; }

std::pair<double, double> SurrogateModel::posterior(const Eigen::VectorXd& x) const {
  if (size() == 0) return {offset_, params_.signal_variance};
  const auto t = static_cast<Eigen::Index>(size());
  Eigen::VectorXd v = cross_kernel(params_, inputs_, x.transpose());
  factor_.topLeftCorner(t, t).triangularView<Eigen::Lower>().solveInPlace(v);
  const double mean = offset_ + v.dot(solved_);
  const double var = std::max(0.0, params_.signal_variance - v.squaredNorm());
  return {mean, var};
}

PosteriorBatch SurrogateModel::posterior_batch(const Eigen::MatrixXd& candidates) const {
  PosteriorBatch out;
  const Eigen::Index m = candidates.rows();
  if (size() == 0) {
    out.mean = Eigen::VectorXd::Constant(m, offset_);
    out.variance = Eigen::VectorXd::Constant(m, params_.signal_variance);
    return out;
  }
  const auto t = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd V = cross_kernel(params_, inputs_, candidates);
  factor_.topLeftCorner(t, t).triangularView<Eigen::Lower>().solveInPlace(V);
  out.mean = (V.transpose() * solved_).array() + offset_;
  out.variance = (params_.signal_variance - V.colwise().squaredNorm().array()).max(0.0).matrix().transpose();
  return out;
}

double SurrogateModel::info_gain() const {
  if (!(params_.noise_variance > 0.0)) {
    throw ModelError("information gain is undefined for zero noise variance");
  }
  const auto t = static_cast<Eigen::Index>(size());
  if (t == 0) return 0.0;
  const double logdet_half = factor_.topLeftCorner(t, t).diagonal().array().log().sum();
  return std::max(0.0, logdet_half - 0.5 * static_cast<double>(t) * std::log(params_.noise_variance));
}

CachedPosterior::CachedPosterior(const Eigen::MatrixXd& candidates) : candidates_(&candidates) {}

void CachedPosterior::recompute(const SurrogateModel& model) {
  const auto t = static_cast<Eigen::Index>(model.size());
  const Eigen::Index m = candidates_->rows();
  Eigen::MatrixXd V = cross_kernel(model.params(), model.inputs(), *candidates_);
  const Eigen::MatrixXd L = model.factor();
  L.triangularView<Eigen::Lower>().solveInPlace(V);
  const Eigen::Index cap = std::max<Eigen::Index>(2 * t, 16);
  projected_.resize(m, cap);
  projected_.leftCols(t) = V.transpose();
  sq_norms_ = V.colwise().squaredNorm().transpose();
  rows_ = model.size();
  params_ = model.params();
  jitter_ = model.jitter();
  ++full_recomputes_;
}

void CachedPosterior::extend(const SurrogateModel& model) {
  const auto t = static_cast<Eigen::Index>(model.size());
  if (projected_.cols() < t) {
    Eigen::MatrixXd grown(projected_.rows(), std::max<Eigen::Index>(2 * t, 16));
    grown.leftCols(static_cast<Eigen::Index>(rows_)) = projected_.leftCols(static_cast<Eigen::Index>(rows_));
    projected_ = std::move(grown);
  }
  const Eigen::MatrixXd L = model.factor();
  for (auto r = static_cast<Eigen::Index>(rows_); r < t; ++r) {
    Eigen::VectorXd col = cross_kernel(model.params(), *candidates_, model.inputs().row(r));
    if (r > 0) col.noalias() -= projected_.leftCols(r) * L.row(r).head(r).transpose();
    col /= L(r, r);
    projected_.col(r) = col;
    sq_norms_.array() += col.array().square();
  }
  rows_ = model.size();
}

PosteriorBatch CachedPosterior::evaluate(const SurrogateModel& model) {
  const Eigen::Index m = candidates_->rows();
  PosteriorBatch out;
  const double s2 = model.params().signal_variance;
  if (model.size() == 0) {
    out.mean = Eigen::VectorXd::Constant(m, model.target_offset());
    out.variance = Eigen::VectorXd::Constant(m, s2);
    return out;
  }
  const bool stale = !params_ || !(*params_ == model.params()) || jitter_ != model.jitter() ||
                     rows_ > model.size() || rows_ == 0;
  if (stale) recompute(model);
  else if (rows_ < model.size()) extend(model);

  const auto t = static_cast<Eigen::Index>(rows_);
  out.mean = (projected_.leftCols(t) * model.solved_targets()).array() + model.target_offset();
  out.variance = (s2 - sq_norms_.array()).max(0.0).matrix();
  return out;
}

double negative_log_marginal_likelihood(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                                        const KernelParams& params, bool center_targets) {
  const Eigen::Index t = targets.size();
  if (t == 0) return 0.0;
  const double offset = center_targets ? targets.mean() : 0.0;
  const Eigen::VectorXd y = targets.array() - offset;
  const Eigen::MatrixXd K = gram(params, inputs);
  double jitter = kJitterBase * params.signal_variance;
  while (true) {
    Eigen::MatrixXd A = K;
    A.diagonal().array() += params.noise_variance + jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    const Eigen::MatrixXd L = llt.matrixL();
    if (llt.info() == Eigen::Success && factor_ok(L)) {
      Eigen::VectorXd w = y;
      L.triangularView<Eigen::Lower>().solveInPlace(w);
      return 0.5 * w.squaredNorm() + L.diagonal().array().log().sum() +
             0.5 * static_cast<double>(t) * std::log(2.0 * 3.14159265358979323846);
    }
    jitter = next_jitter(jitter);
    if (!within_ceiling(jitter, params.signal_variance)) return std::numeric_limits<double>::infinity();
  }
}

}  // namespace nashbo
