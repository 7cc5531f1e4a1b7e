#pragma once

// Dense-layer kernels. Every output element is accumulated in the same
// order by the serial and the OpenMP variants, so both produce bit-identical
// results regardless of thread count.

#include <span>

#include "declinecast/nn/matrix.hpp"

namespace declinecast::nn::kernels {

namespace serial {

// y(s, o) = bias(o) + sum_i w(o, i) * x(s, i)
void dense_forward(const Matrix& x, const Matrix& w, std::span<const double> bias, Matrix& y);

// dw(o, i) = sum_s dy(s, o) * x(s, i);  db(o) = sum_s dy(s, o)
void dense_param_grad(const Matrix& x, const Matrix& dy, Matrix& dw, std::span<double> db);

// dx(s, i) = sum_o dy(s, o) * w(o, i)
void dense_input_grad(const Matrix& dy, const Matrix& w, Matrix& dx);

}  // namespace serial

namespace parallel {

void dense_forward(const Matrix& x, const Matrix& w, std::span<const double> bias, Matrix& y);
void dense_param_grad(const Matrix& x, const Matrix& dy, Matrix& dw, std::span<double> db);
void dense_input_grad(const Matrix& dy, const Matrix& w, Matrix& dx);

// Below this many multiply-adds the OpenMP variants run on the calling thread.
inline constexpr long kMinParallelWork = 1L << 16;

}  // namespace parallel

}  // namespace declinecast::nn::kernels
