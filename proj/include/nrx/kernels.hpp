#pragma once

#include <cstdint>

namespace nrx::kernels {

// Dense and depthwise convolutions use "same" zero padding; kernel extents are
// odd so the output spatial size equals the input. Effective reach per axis is
// dil*(k-1)+1.
struct ConvDims {
    std::int64_t batch, h, w;
    std::int64_t in_c, out_c;
    std::int64_t kh, kw;
    std::int64_t dil_h, dil_w;
};

// Depthwise: weights [kh, kw, in_c, mult], output channel index = ci*mult + m.
struct DepthwiseDims {
    std::int64_t batch, h, w;
    std::int64_t in_c, mult;
    std::int64_t kh, kw;
    std::int64_t dil_h, dil_w;
};

enum class Backend { serial, openmp };

// Process-wide kernel backend. OpenMP kernels assign each output element to
// exactly one thread and keep the per-element summation order identical to the
// serial path, so both backends produce bit-identical results.
Backend backend();
void set_backend(Backend b);

// Thread count for the OpenMP backend (0 = library default). Reads NRX_THREADS
// on first use.
void set_threads(int n);
int threads();

namespace serial {

template <typename T>
void conv2d_forward(const ConvDims& d, const T* x, const T* w, const T* bias, T* out);
template <typename T>
void conv2d_backward_input(const ConvDims& d, const T* gout, const T* w, T* gx);
template <typename T>
void conv2d_backward_weights(const ConvDims& d, const T* x, const T* gout, T* gw);
template <typename T>
void conv2d_backward_bias(const ConvDims& d, const T* gout, T* gb);

template <typename T>
void depthwise_forward(const DepthwiseDims& d, const T* x, const T* w, const T* bias, T* out);
template <typename T>
void depthwise_backward_input(const DepthwiseDims& d, const T* gout, const T* w, T* gx);
template <typename T>
void depthwise_backward_weights(const DepthwiseDims& d, const T* x, const T* gout, T* gw);
template <typename T>
void depthwise_backward_bias(const DepthwiseDims& d, const T* gout, T* gb);

// rows = batch*h*w positions, channels normalized per row.
template <typename T>
void layernorm_forward(std::int64_t rows, std::int64_t c, T eps, const T* x, const T* gamma,
                       const T* beta, T* out, T* mean, T* rstd);
template <typename T>
void layernorm_backward(std::int64_t rows, std::int64_t c, const T* x, const T* gamma,
                        const T* mean, const T* rstd, const T* gout, T* gx, T* ggamma, T* gbeta);

}  // namespace serial

namespace omp {

template <typename T>
void conv2d_forward(const ConvDims& d, const T* x, const T* w, const T* bias, T* out);
template <typename T>
void conv2d_backward_input(const ConvDims& d, const T* gout, const T* w, T* gx);
template <typename T>
void conv2d_backward_weights(const ConvDims& d, const T* x, const T* gout, T* gw);
template <typename T>
void conv2d_backward_bias(const ConvDims& d, const T* gout, T* gb);

template <typename T>
void depthwise_forward(const DepthwiseDims& d, const T* x, const T* w, const T* bias, T* out);
template <typename T>
void depthwise_backward_input(const DepthwiseDims& d, const T* gout, const T* w, T* gx);
template <typename T>
void depthwise_backward_weights(const DepthwiseDims& d, const T* x, const T* gout, T* gw);
template <typename T>
void depthwise_backward_bias(const DepthwiseDims& d, const T* gout, T* gb);

template <typename T>
void layernorm_forward(std::int64_t rows, std::int64_t c, T eps, const T* x, const T* gamma,
                       const T* beta, T* out, T* mean, T* rstd);
template <typename T>
void layernorm_backward(std::int64_t rows, std::int64_t c, const T* x, const T* gamma,
                        const T* mean, const T* rstd, const T* gout, T* gx, T* ggamma, T* gbeta);

}  // namespace omp

// Dispatch through the active backend.
template <typename T>
void conv2d_forward(const ConvDims& d, const T* x, const T* w, const T* bias, T* out);
template <typename T>
void conv2d_backward_input(const ConvDims& d, const T* gout, const T* w, T* gx);
template <typename T>
void conv2d_backward_weights(const ConvDims& d, const T* x, const T* gout, T* gw);
template <typename T>
void conv2d_backward_bias(const ConvDims& d, const T* gout, T* gb);
template <typename T>
void depthwise_forward(const DepthwiseDims& d, const T* x, const T* w, const T* bias, T* out);
template <typename T>
void depthwise_backward_input(const DepthwiseDims& d, const T* gout, const T* w, T* gx);
template <typename T>
void depthwise_backward_weights(const DepthwiseDims& d, const T* x, const T* gout, T* gw);
template <typename T>
void depthwise_backward_bias(const DepthwiseDims& d, const T* gout, T* gb);
template <typename T>
void layernorm_forward(std::int64_t rows, std::int64_t c, T eps, const T* x, const T* gamma,
                       const T* beta, T* out, T* mean, T* rstd);
template <typename T>
void layernorm_backward(std::int64_t rows, std::int64_t c, const T* x, const T* gamma,
                        const T* mean, const T* rstd, const T* gout, T* gx, T* ggamma, T* gbeta);

}  // namespace nrx::kernels
