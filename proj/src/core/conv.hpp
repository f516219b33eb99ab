#pragma once

#include "core/autograd.hpp"

namespace secor::core {

// x {Ci,H,W}, w {Co,Ci,kh,kw}, optional b {Co}; zero padding.
Var conv2d(const Var& x, const Var& w, const Var& b, int stride = 1, int pad = 0);

// x {Ci,H,W}, w {Ci,Co,kh,kw}; output {Co, (H-1)*stride+kh, (W-1)*stride+kw}.
Var conv_transpose2d(const Var& x, const Var& w, const Var& b, int stride);

Var avg_pool2x2(const Var& x);

Var reflect_pad2(const Var& x, int top, int bottom, int left, int right);
Var crop2(const Var& x, int top, int left, int h, int w);

} // namespace secor::core
