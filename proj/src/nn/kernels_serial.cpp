#include "declinecast/nn/kernels.hpp"

namespace declinecast::nn::kernels::serial {

void dense_forward(const Matrix& x, const Matrix& w, std::span<const double> bias, Matrix& y) {
    const std::size_t batch = x.rows, in = x.cols, out = w.rows;
    y = Matrix(batch, out);
    for (std::size_t s = 0; s < batch; ++s) {
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
    const std::size_t batch = x.rows, in = x.cols, out = dy.cols;
    dw = Matrix(out, in);
    for (std::size_t o = 0; o < out; ++o) {
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
    const std::size_t batch = dy.rows, out = dy.cols, in = w.cols;
    dx = Matrix(batch, in);
    for (std::size_t s = 0; s < batch; ++s) {
        double* dxs = dx.data.data() + s * in;
        for (std::size_t o = 0; o < out; ++o) {
            const double g = dy.data[s * out + o];
            const double* wo = w.data.data() + o * in;
            for (std::size_t i = 0; i < in; ++i) dxs[i] += g * wo[i];
        }
    }
}

}  // namespace declinecast::nn::kernels::serial
