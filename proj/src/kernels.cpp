#include "nrx/kernels.hpp"

#include <omp.h>

#include <atomic>
#include <cstdlib>

#include "kernels_impl.hpp"

namespace nrx::kernels {

namespace {

std::atomic<Backend> g_backend{Backend::openmp};
std::atomic<int> g_threads{-1};  // -1 = uninitialized

int resolve_threads() {
    int t = g_threads.load();
    if (t == -1) {
        t = 0;
        if (const char* env = std::getenv("NRX_THREADS")) {
            t = std::atoi(env);
            if (t < 0) t = 0;
        }
        g_threads.store(t);
    }
    return t;
}

}  // namespace

Backend backend() { return g_backend.load(); }
void set_backend(Backend b) { g_backend.store(b); }

void set_threads(int n) { g_threads.store(n < 0 ? 0 : n); }

int threads() {
    const int t = resolve_threads();
    return t > 0 ? t : omp_get_max_threads();
}

namespace serial {

template <typename T>
void conv2d_forward(const ConvDims& d, const T* x, const T* w, const T* bias, T* out) {
    impl::conv2d_forward<impl::SerialFor>(d, x, w, bias, out);
}
template <typename T>
void conv2d_backward_input(const ConvDims& d, const T* gout, const T* w, T* gx) {
    impl::conv2d_backward_input<impl::SerialFor>(d, gout, w, gx);
}
template <typename T>
void conv2d_backward_weights(const ConvDims& d, const T* x, const T* gout, T* gw) {
    impl::conv2d_backward_weights<impl::SerialFor>(d, x, gout, gw);
}
template <typename T>
void conv2d_backward_bias(const ConvDims& d, const T* gout, T* gb) {
    impl::conv2d_backward_bias<impl::SerialFor>(d, gout, gb);
}
template <typename T>
void depthwise_forward(const DepthwiseDims& d, const T* x, const T* w, const T* bias, T* out) {
    impl::depthwise_forward<impl::SerialFor>(d, x, w, bias, out);
}
template <typename T>
void depthwise_backward_input(const DepthwiseDims& d, const T* gout, const T* w, T* gx) {
    impl::depthwise_backward_input<impl::SerialFor>(d, gout, w, gx);
}
template <typename T>
void depthwise_backward_weights(const DepthwiseDims& d, const T* x, const T* gout, T* gw) {
    impl::depthwise_backward_weights<impl::SerialFor>(d, x, gout, gw);
}
template <typename T>
void depthwise_backward_bias(const DepthwiseDims& d, const T* gout, T* gb) {
    impl::depthwise_backward_bias<impl::SerialFor>(d, gout, gb);
}
template <typename T>
void layernorm_forward(std::int64_t rows, std::int64_t c, T eps, const T* x, const T* gamma,
                       const T* beta, T* out, T* mean, T* rstd) {
    impl::layernorm_forward<impl::SerialFor>(rows, c, eps, x, gamma, beta, out, mean, rstd);
}
template <typename T>
void layernorm_backward(std::int64_t rows, std::int64_t c, const T* x, const T* gamma,
                        const T* mean, const T* rstd, const T* gout, T* gx, T* ggamma, T* gbeta) {
    impl::layernorm_backward<impl::SerialFor>(rows, c, x, gamma, mean, rstd, gout, gx, ggamma,
                                              gbeta);
}

}  // namespace serial

namespace omp {

namespace {
struct ThreadScope {
    ThreadScope() {
        const int t = resolve_threads();
        if (t > 0) {
            saved_ = omp_get_max_threads();
            omp_set_num_threads(t);
        }
    }
    ~ThreadScope() {
        if (saved_ > 0) omp_set_num_threads(saved_);
    }
    int saved_ = 0;
};
}  // namespace

template <typename T>
void conv2d_forward(const ConvDims& d, const T* x, const T* w, const T* bias, T* out) {
    ThreadScope ts;
    impl::conv2d_forward<impl::OmpFor>(d, x, w, bias, out);
}
template <typename T>
void conv2d_backward_input(const ConvDims& d, const T* gout, const T* w, T* gx) {
    ThreadScope ts;
    impl::conv2d_backward_input<impl::OmpFor>(d, gout, w, gx);
}
template <typename T>
void conv2d_backward_weights(const ConvDims& d, const T* x, const T* gout, T* gw) {
    ThreadScope ts;
    impl::conv2d_backward_weights<impl::OmpFor>(d, x, gout, gw);
}
template <typename T>
void conv2d_backward_bias(const ConvDims& d, const T* gout, T* gb) {
    ThreadScope ts;
    impl::conv2d_backward_bias<impl::OmpFor>(d, gout, gb);
}
template <typename T>
void depthwise_forward(const DepthwiseDims& d, const T* x, const T* w, const T* bias, T* out) {
    ThreadScope ts;
    impl::depthwise_forward<impl::OmpFor>(d, x, w, bias, out);
}
template <typename T>
void depthwise_backward_input(const DepthwiseDims& d, const T* gout, const T* w, T* gx) {
    ThreadScope ts;
    impl::depthwise_backward_input<impl::OmpFor>(d, gout, w, gx);
}
template <typename T>
void depthwise_backward_weights(const DepthwiseDims& d, const T* x, const T* gout, T* gw) {
    ThreadScope ts;
    impl::depthwise_backward_weights<impl::OmpFor>(d, x, gout, gw);
}
template <typename T>
void depthwise_backward_bias(const DepthwiseDims& d, const T* gout, T* gb) {
    ThreadScope ts;
    impl::depthwise_backward_bias<impl::OmpFor>(d, gout, gb);
}
template <typename T>
void layernorm_forward(std::int64_t rows, std::int64_t c, T eps, const T* x, const T* gamma,
                       const T* beta, T* out, T* mean, T* rstd) {
    ThreadScope ts;
    impl::layernorm_forward<impl::OmpFor>(rows, c, eps, x, gamma, beta, out, mean, rstd);
}
template <typename T>
void layernorm_backward(std::int64_t rows, std::int64_t c, const T* x, const T* gamma,
                        const T* mean, const T* rstd, const T* gout, T* gx, T* ggamma, T* gbeta) {
    ThreadScope ts;
    impl::layernorm_backward<impl::OmpFor>(rows, c, x, gamma, mean, rstd, gout, gx, ggamma, gbeta);
}

}  // namespace omp

template <typename T>
void conv2d_forward(const ConvDims& d, const T* x, const T* w, const T* bias, T* out) {
    if (backend() == Backend::serial)
        serial::conv2d_forward(d, x, w, bias, out);
    else
        omp::conv2d_forward(d, x, w, bias, out);
}
template <typename T>
void conv2d_backward_input(const ConvDims& d, const T* gout, const T* w, T* gx) {
    if (backend() == Backend::serial)
        serial::conv2d_backward_input(d, gout, w, gx);
    else
        omp::conv2d_backward_input(d, gout, w, gx);
}
template <typename T>
void conv2d_backward_weights(const ConvDims& d, const T* x, const T* gout, T* gw) {
    if (backend() == Backend::serial)
        serial::conv2d_backward_weights(d, x, gout, gw);
    else
        omp::conv2d_backward_weights(d, x, gout, gw);
}
template <typename T>
void conv2d_backward_bias(const ConvDims& d, const T* gout, T* gb) {
    if (backend() == Backend::serial)
        serial::conv2d_backward_bias(d, gout, gb);
    else
        omp::conv2d_backward_bias(d, gout, gb);
}
template <typename T>
void depthwise_forward(const DepthwiseDims& d, const T* x, const T* w, const T* bias, T* out) {
    if (backend() == Backend::serial)
        serial::depthwise_forward(d, x, w, bias, out);
    else
        omp::depthwise_forward(d, x, w, bias, out);
}
template <typename T>
void depthwise_backward_input(const DepthwiseDims& d, const T* gout, const T* w, T* gx) {
    if (backend() == Backend::serial)
        serial::depthwise_backward_input(d, gout, w, gx);
    else
        omp::depthwise_backward_input(d, gout, w, gx);
}
template <typename T>
void depthwise_backward_weights(const DepthwiseDims& d, const T* x, const T* gout, T* gw) {
    if (backend() == Backend::serial)
        serial::depthwise_backward_weights(d, x, gout, gw);
    else
        omp::depthwise_backward_weights(d, x, gout, gw);
}
template <typename T>
void depthwise_backward_bias(const DepthwiseDims& d, const T* gout, T* gb) {
    if (backend() == Backend::serial)
        serial::depthwise_backward_bias(d, gout, gb);
    else
        omp::depthwise_backward_bias(d, gout, gb);
}
template <typename T>
void layernorm_forward(std::int64_t rows, std::int64_t c, T eps, const T* x, const T* gamma,
                       const T* beta, T* out, T* mean, T* rstd) {
    if (backend() == Backend::serial)
        serial::layernorm_forward(rows, c, eps, x, gamma, beta, out, mean, rstd);
    else
        omp::layernorm_forward(rows, c, eps, x, gamma, beta, out, mean, rstd);
}
template <typename T>
void layernorm_backward(std::int64_t rows, std::int64_t c, const T* x, const T* gamma,
                        const T* mean, const T* rstd, const T* gout, T* gx, T* ggamma, T* gbeta) {
    if (backend() == Backend::serial)
        serial::layernorm_backward(rows, c, x, gamma, mean, rstd, gout, gx, ggamma, gbeta);
    else
        omp::layernorm_backward(rows, c, x, gamma, mean, rstd, gout, gx, ggamma, gbeta);
}

#define NRX_INSTANTIATE_KERNELS(NS, T)                                                           \
    template void NS conv2d_forward<T>(const ConvDims&, const T*, const T*, const T*, T*);       \
    template void NS conv2d_backward_input<T>(const ConvDims&, const T*, const T*, T*);          \
    template void NS conv2d_backward_weights<T>(const ConvDims&, const T*, const T*, T*);        \
    template void NS conv2d_backward_bias<T>(const ConvDims&, const T*, T*);                     \
    template void NS depthwise_forward<T>(const DepthwiseDims&, const T*, const T*, const T*,    \
                                          T*);                                                   \
    template void NS depthwise_backward_input<T>(const DepthwiseDims&, const T*, const T*, T*);  \
    template void NS depthwise_backward_weights<T>(const DepthwiseDims&, const T*, const T*,     \
                                                   T*);                                          \
    template void NS depthwise_backward_bias<T>(const DepthwiseDims&, const T*, T*);             \
    template void NS layernorm_forward<T>(std::int64_t, std::int64_t, T, const T*, const T*,     \
                                          const T*, T*, T*, T*);                                 \
    template void NS layernorm_backward<T>(std::int64_t, std::int64_t, const T*, const T*,       \
                                           const T*, const T*, const T*, T*, T*, T*)

NRX_INSTANTIATE_KERNELS(serial::, float);
NRX_INSTANTIATE_KERNELS(serial::, double);
NRX_INSTANTIATE_KERNELS(omp::, float);
NRX_INSTANTIATE_KERNELS(omp::, double);
NRX_INSTANTIATE_KERNELS(, float);
NRX_INSTANTIATE_KERNELS(, double);

#undef NRX_INSTANTIATE_KERNELS

}  // namespace nrx::kernels
