#pragma once

#include <vector>

#include "core/autograd.hpp"

namespace secor::core {

// Input-dependent state-space recurrence over a 1D sequence:
//   h_t = exp(dt_t * A) (.) h_{t-1} + dt_t * B_t * x_t
//   y_t = <C_t, h_t> + D (.) x_t
// Shapes: x, dt {L,C}; B, C {L,N}; A {C,N}; D {C}. dt must be positive and A
// negative for a stable transition; the caller owns those parameterizations.
Var selective_scan(const Var& x, const Var& dt, const Var& B, const Var& Cc,
                   const Var& A, const Var& D);

// Deterministic traversal orders for 2D maps.
enum class ScanDir { Row = 0, RowRev = 1, Col = 2, ColRev = 3 };
constexpr int kNumScanDirs = 4;

std::vector<int> scan_order(int H, int W, ScanDir dir);

Var unfold_seq(const Var& f, const std::vector<int>& order); // {C,H,W} -> {L,C}
Var fold_seq(const Var& s, const std::vector<int>& order, int H, int W); // {L,C} -> {C,H,W}

} // namespace secor::core
