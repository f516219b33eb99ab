#pragma once

#include <vector>

#include "core/autograd.hpp"

namespace secor::core {

// Elementwise, same shape.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);

// Tensor-scalar with plain doubles.
Var add_c(const Var& a, double c);
Var mul_c(const Var& a, double c);
Var pow_c(const Var& a, double p); // requires positive base when p is non-integral

// Broadcast against a one-element Var (keeps the scalar differentiable).
Var bmul(const Var& a, const Var& s);
Var badd(const Var& a, const Var& s);
Var bdiv(const Var& a, const Var& s);

Var neg(const Var& a);
Var exp_v(const Var& a);
Var log_v(const Var& a);
Var sqrt_v(const Var& a);
Var abs_v(const Var& a);
Var square(const Var& a);
Var sigmoid(const Var& a);
Var softplus(const Var& a);
Var gelu(const Var& a);
Var sin_v(const Var& a);
Var cos_v(const Var& a);
// atan2 with an epsilon-guarded denominator in the backward pass so zero
// bins cannot poison the tape with infs.
Var atan2_v(const Var& y, const Var& x, double back_eps = 1e-12);
Var clamp01(const Var& a);

Var sum(const Var& a);
Var mean(const Var& a);

Var matmul(const Var& a, const Var& b); // {m,k} x {k,n} -> {m,n}
Var add_rowvec(const Var& a, const Var& b); // {m,k} + {k} broadcast over rows
Var reshape(const Var& a, std::vector<int> shape);

Var stack_scalars(const std::vector<Var>& xs); // n one-element Vars -> {n}
Var concat0(const std::vector<Var>& xs);       // along axis 0, equal trailing dims
Var narrow0(const Var& a, int start, int len); // slice along axis 0

// {C,H,W} helpers used by attention blocks.
Var channel_mean(const Var& x); // -> {1,H,W}
Var channel_max(const Var& x);  // -> {1,H,W}, grad routed to argmax
Var broadcast_mul_ch(const Var& x, const Var& gate); // gate {1,H,W}

// Layer norm across the channel axis at each spatial site, affine per channel.
Var layer_norm_ch(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-6);

Var cosine_sim(const Var& a, const Var& b); // 1-D vectors, unit-agnostic
double cosine_sim(const Tensor& a, const Tensor& b);

Var constant(Tensor t);
Var constant(double v);

// Operators for readability in model code.
inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }

} // namespace secor::core
