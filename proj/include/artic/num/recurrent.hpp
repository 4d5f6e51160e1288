#pragma once

#include <memory>

#include "artic/num/tape.hpp"

namespace artic::num {

// Gate layout in the stacked 4H rows: input, forget, cell candidate, output.
// c' = f.c + i.g ; h' = o.tanh(c').

namespace detail {

template <typename Scalar>
struct LstmTrace {
  Mat<Scalar> gates;   // 4H x T, post-activation
  Mat<Scalar> cells;   // H x T
  Mat<Scalar> tanh_c;  // H x T
  Mat<Scalar> h_prev;  // H x T, hidden fed into each step (zeros at start)
};

}  // namespace detail

// Whole-sequence LSTM with zero initial state; one tape node. Input x is
// I x T (time as columns), output is H x T. With reverse=true the scan runs
// from the last column to the first, so output column t has seen x[t..T-1].
// Backward is hand-rolled BPTT over the stored gate activations.
template <typename Scalar>
Var<Scalar> lstm_seq(Var<Scalar> w_ih, Var<Scalar> w_hh, Var<Scalar> b, Var<Scalar> x,
                     bool reverse = false) {
  Tape<Scalar>* t = detail::same_tape(w_ih, x);
  detail::same_tape(w_hh, b);
  const Eigen::Index H = w_hh.cols(), T = x.cols(), I = x.rows();
  if (T == 0) throw DimensionError("lstm_seq: empty sequence");
  if (w_ih.rows() != 4 * H || w_ih.cols() != I || w_hh.rows() != 4 * H || b.rows() != 4 * H)
    throw DimensionError("lstm_seq: parameter shape mismatch");

  auto trace = std::make_shared<detail::LstmTrace<Scalar>>();
  trace->gates.resize(4 * H, T);
  trace->cells.resize(H, T);
  trace->tanh_c.resize(H, T);
  trace->h_prev.setZero(H, T);

  Mat<Scalar> z_in = w_ih.value() * x.value();  // input contribution, all steps at once
  z_in.colwise() += Vec<Scalar>(b.value().col(0));

  Mat<Scalar> out(H, T);
  Vec<Scalar> h = Vec<Scalar>::Zero(H), c = Vec<Scalar>::Zero(H);
  for (Eigen::Index s = 0; s < T; ++s) {
    const Eigen::Index tau = reverse ? T - 1 - s : s;
    trace->h_prev.col(tau) = h;
    Vec<Scalar> z = z_in.col(tau) + w_hh.value() * h;
    auto zi = z.segment(0, H).array(), zf = z.segment(H, H).array(),
         zg = z.segment(2 * H, H).array(), zo = z.segment(3 * H, H).array();
    Vec<Scalar> gi = (Scalar(1) / (Scalar(1) + (-zi).exp())).matrix();
    Vec<Scalar> gf = (Scalar(1) / (Scalar(1) + (-zf).exp())).matrix();
    Vec<Scalar> gg = zg.tanh().matrix();
    Vec<Scalar> go = (Scalar(1) / (Scalar(1) + (-zo).exp())).matrix();
    c = gf.cwiseProduct(c) + gi.cwiseProduct(gg);
    Vec<Scalar> tc = c.array().tanh().matrix();
    h = go.cwiseProduct(tc);
    trace->gates.col(tau) << gi, gf, gg, go;
    trace->cells.col(tau) = c;
    trace->tanh_c.col(tau) = tc;
    out.col(tau) = h;
  }

  bool rg = t->needs_grad(w_ih.id) || t->needs_grad(w_hh.id) || t->needs_grad(b.id) ||
            t->needs_grad(x.id);
  if (!rg) return t->push(std::move(out), false, nullptr);
  const auto oid = t->next_id();
  return t->push(std::move(out), true, [t, w_ih, w_hh, b, x, trace, reverse, H, T, oid] {
    const auto& g_out = t->grad(oid);
    Mat<Scalar> dz(4 * H, T);
    Vec<Scalar> dh_carry = Vec<Scalar>::Zero(H), dc_carry = Vec<Scalar>::Zero(H);
    for (Eigen::Index s = T - 1; s >= 0; --s) {
      const Eigen::Index tau = reverse ? T - 1 - s : s;
      auto gi = trace->gates.col(tau).segment(0, H).array();
      auto gf = trace->gates.col(tau).segment(H, H).array();
      auto gg = trace->gates.col(tau).segment(2 * H, H).array();
      auto go = trace->gates.col(tau).segment(3 * H, H).array();
      auto tc = trace->tanh_c.col(tau).array();
      Vec<Scalar> dh = g_out.col(tau) + dh_carry;
      Vec<Scalar> dc =
          (dh.array() * go * (Scalar(1) - tc * tc)).matrix() + dc_carry;
      Eigen::Array<Scalar, Eigen::Dynamic, 1> c_prev =
          Eigen::Array<Scalar, Eigen::Dynamic, 1>::Zero(H);
      if (s > 0) c_prev = trace->cells.col(reverse ? T - s : s - 1).array();
      dz.col(tau).segment(0, H) = (dc.array() * gg * gi * (Scalar(1) - gi)).matrix();
      dz.col(tau).segment(H, H) = (dc.array() * c_prev * gf * (Scalar(1) - gf)).matrix();
      dz.col(tau).segment(2 * H, H) = (dc.array() * gi * (Scalar(1) - gg * gg)).matrix();
      dz.col(tau).segment(3 * H, H) = (dh.array() * tc * go * (Scalar(1) - go)).matrix();
      dh_carry.noalias() = w_hh.value().transpose() * dz.col(tau);
      dc_carry = (dc.array() * gf).matrix();
    }
    if (t->needs_grad(w_ih.id)) t->grad(w_ih.id).noalias() += dz * x.value().transpose();
    if (t->needs_grad(w_hh.id)) t->grad(w_hh.id).noalias() += dz * trace->h_prev.transpose();
    if (t->needs_grad(b.id)) t->grad(b.id) += dz.rowwise().sum();
    if (t->needs_grad(x.id)) t->grad(x.id).noalias() += w_ih.value().transpose() * dz;
  });
}

// Single LSTM step with explicit state; returns [h'; c'] stacked (2H x 1).
template <typename Scalar>
Var<Scalar> lstm_step(Var<Scalar> w_ih, Var<Scalar> w_hh, Var<Scalar> b, Var<Scalar> x,
                      Var<Scalar> h, Var<Scalar> c) {
  Tape<Scalar>* t = detail::same_tape(w_ih, x);
  const Eigen::Index H = w_hh.cols(), I = x.rows();
  if (x.cols() != 1 || h.cols() != 1 || c.cols() != 1)
    throw DimensionError("lstm_step: expects column vectors");
  if (w_ih.rows() != 4 * H || w_ih.cols() != I || h.rows() != H || c.rows() != H)
    throw DimensionError("lstm_step: dimension mismatch");

  Vec<Scalar> z = w_ih.value() * x.value().col(0) + w_hh.value() * h.value().col(0) +
                  b.value().col(0);
  auto zi = z.segment(0, H).array(), zf = z.segment(H, H).array(),
       zg = z.segment(2 * H, H).array(), zo = z.segment(3 * H, H).array();
  auto gates = std::make_shared<Mat<Scalar>>(4 * H, 1);
  gates->col(0).segment(0, H) = (Scalar(1) / (Scalar(1) + (-zi).exp())).matrix();
  gates->col(0).segment(H, H) = (Scalar(1) / (Scalar(1) + (-zf).exp())).matrix();
  gates->col(0).segment(2 * H, H) = zg.tanh().matrix();
  gates->col(0).segment(3 * H, H) = (Scalar(1) / (Scalar(1) + (-zo).exp())).matrix();
  auto gi = gates->col(0).segment(0, H).array();
  auto gf = gates->col(0).segment(H, H).array();
  auto gg = gates->col(0).segment(2 * H, H).array();
  auto go = gates->col(0).segment(3 * H, H).array();

  Mat<Scalar> out(2 * H, 1);
  out.col(0).segment(H, H) = (gf * c.value().col(0).array() + gi * gg).matrix();
  auto tanh_c = std::make_shared<Vec<Scalar>>(out.col(0).segment(H, H).array().tanh().matrix());
  out.col(0).segment(0, H) = (go * tanh_c->array()).matrix();

  bool rg = t->needs_grad(w_ih.id) || t->needs_grad(w_hh.id) || t->needs_grad(b.id) ||
            t->needs_grad(x.id) || t->needs_grad(h.id) || t->needs_grad(c.id);
  if (!rg) return t->push(std::move(out), false, nullptr);
  const auto oid = t->next_id();
  return t->push(std::move(out), true, [t, w_ih, w_hh, b, x, h, c, gates, tanh_c, H, oid] {
    const auto& g_out = t->grad(oid);
    auto gi = gates->col(0).segment(0, H).array();
    auto gf = gates->col(0).segment(H, H).array();
    auto gg = gates->col(0).segment(2 * H, H).array();
    auto go = gates->col(0).segment(3 * H, H).array();
    auto tc = tanh_c->array();
    Vec<Scalar> dh = g_out.col(0).segment(0, H);
    Vec<Scalar> dc = (dh.array() * go * (Scalar(1) - tc * tc)).matrix() +
                     Vec<Scalar>(g_out.col(0).segment(H, H));
    Vec<Scalar> dz(4 * H);
    dz.segment(0, H) = (dc.array() * gg * gi * (Scalar(1) - gi)).matrix();
    dz.segment(H, H) = (dc.array() * c.value().col(0).array() * gf * (Scalar(1) - gf)).matrix();
    dz.segment(2 * H, H) = (dc.array() * gi * (Scalar(1) - gg * gg)).matrix();
    dz.segment(3 * H, H) = (dh.array() * tc * go * (Scalar(1) - go)).matrix();
    if (t->needs_grad(w_ih.id))
      t->grad(w_ih.id).noalias() += dz * x.value().col(0).transpose();
    if (t->needs_grad(w_hh.id))
      t->grad(w_hh.id).noalias() += dz * h.value().col(0).transpose();
    if (t->needs_grad(b.id)) t->grad(b.id).col(0) += dz;
    if (t->needs_grad(x.id)) t->grad(x.id).col(0).noalias() += w_ih.value().transpose() * dz;
    if (t->needs_grad(h.id)) t->grad(h.id).col(0).noalias() += w_hh.value().transpose() * dz;
    if (t->needs_grad(c.id)) t->grad(c.id).col(0) += (dc.array() * gf).matrix();
  });
}

}  // namespace artic::num
