#include "declinecast/nn/kernels.hpp"

namespace declinecast::nn::kernels::parallel {

namespace {
long work(std::size_t a, std::size_t b, std::size_t c) {
    return static_cast<long>(a) * static_cast<long>(b) * static_cast<long>(c);
}
}  // namespace

void dense_forward(const Matrix& x, const Matrix& w, std::span<const double> bias, Matrix& y) {
    const long batch = static_cast<long>(x.rows);
    const std::size_t in = x.cols, out = w.rows;
    y = Matrix(x.rows, out);
#pragma omp parallel for schedule(static) if (work(x.rows, in, out) >= kMinParallelWork)
    for (long s = 0; s < batch; ++s) {
        const double* xs = x.data.data() + s * in;
        for (std::size_t o = 0; o < out; ++o) {
            const double* wo = w.data.data() + o * in;
            double acc = bias[o];
            for (std::size_t i = 0; i < in; ++i) acc += wo[i] * xs[i];
            y.data[s * out + o] = acc;
        }
    }
}

void dense_param_grad(const Matrix& x, const Matrix& dy, Matrix& dw, std::span<double> db) {
    const std::size_t batch = x.rows, in = x.cols;
    const long out = static_cast<long>(dy.cols);
    dw = Matrix(dy.cols, in);
#pragma omp parallel for schedule(static) if (work(batch, in, dy.cols) >= kMinParallelWork)
    for (long o = 0; o < out; ++o) {
        double* dwo = dw.data.data() + o * in;
        double bsum = 0.0;
        for (std::size_t s = 0; s < batch; ++s) {
            const double g = dy.data[s * out + o];
            bsum += g;
            const double* xs = x.data.data() + s * in;
            for (std::size_t i = 0; i < in; ++i) dwo[i] += g * xs[i];
        }
        db[o] = bsum;
    }
}

void dense_input_grad(const Matrix& dy, const Matrix& w, Matrix& dx) {
    const long batch = static_cast<long>(dy.rows);
    const std::size_t out = dy.cols, in = w.cols;
    dx = Matrix(dy.rows, in);
#pragma omp parallel for schedule(static) if (work(dy.rows, in, out) >= kMinParallelWork)
    for (long s = 0; s < batch; ++s) {
        double* dxs = dx.data.data() + s * in;
        for (std::size_t o = 0; o < out; ++o) {
            const double g = dy.data[s * out + o];
            const double* wo = w.data.data() + o * in;
            for (std::size_t i = 0; i < in; ++i) dxs[i] += g * wo[i];
        }
    }
}

}  // namespace declinecast::nn::kernels::parallel
