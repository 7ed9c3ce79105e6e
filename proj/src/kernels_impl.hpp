#pragma once

#include <cmath>
#include <cstdint>

#include "nrx/kernels.hpp"

// Loop bodies shared by the serial and OpenMP backends. Each index handed to
// the policy owns a disjoint slice of the output and uses the same summation
// order as the serial path, so results are bit-identical across backends and
// thread counts.

namespace nrx::kernels::impl {

struct SerialFor {
    template <typename F>
    static void run(std::int64_t n, F&& f) {
        for (std::int64_t i = 0; i < n; ++i) f(i);
    }
};

struct OmpFor {
    template <typename F>
    static void run(std::int64_t n, F&& f) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) f(i);
    }
};

template <typename Par, typename T>
void conv2d_forward(const ConvDims& d, const T* x, const T* w, const T* bias, T* out) {
    const std::int64_t pad_h = d.dil_h * (d.kh - 1) / 2;
    const std::int64_t pad_w = d.dil_w * (d.kw - 1) / 2;
    const std::int64_t positions = d.batch * d.h * d.w;
    Par::run(positions, [&](std::int64_t p) {
        const std::int64_t b = p / (d.h * d.w);
        const std::int64_t oh = (p / d.w) % d.h;
        const std::int64_t ow = p % d.w;
        T* o = out + p * d.out_c;
        for (std::int64_t co = 0; co < d.out_c; ++co) o[co] = bias ? bias[co] : T(0);
        for (std::int64_t kh = 0; kh < d.kh; ++kh) {
            const std::int64_t ih = oh + kh * d.dil_h - pad_h;
            if (ih < 0 || ih >= d.h) continue;
            for (std::int64_t kw = 0; kw < d.kw; ++kw) {
                const std::int64_t iw = ow + kw * d.dil_w - pad_w;
                if (iw < 0 || iw >= d.w) continue;
                const T* xr = x + ((b * d.h + ih) * d.w + iw) * d.in_c;
                const T* wr = w + (kh * d.kw + kw) * d.in_c * d.out_c;
                for (std::int64_t ci = 0; ci < d.in_c; ++ci) {
                    const T xv = xr[ci];
                    const T* wc = wr + ci * d.out_c;
                    for (std::int64_t co = 0; co < d.out_c; ++co) o[co] += xv * wc[co];
                }
            }
        }
    });
}

template <typename Par, typename T>
void conv2d_backward_input(const ConvDims& d, const T* gout, const T* w, T* gx) {
    const std::int64_t pad_h = d.dil_h * (d.kh - 1) / 2;
    const std::int64_t pad_w = d.dil_w * (d.kw - 1) / 2;
    const std::int64_t positions = d.batch * d.h * d.w;
    Par::run(positions, [&](std::int64_t p) {
        const std::int64_t b = p / (d.h * d.w);
        const std::int64_t ih = (p / d.w) % d.h;
        const std::int64_t iw = p % d.w;
        T* g = gx + p * d.in_c;
        for (std::int64_t ci = 0; ci < d.in_c; ++ci) g[ci] = T(0);
        for (std::int64_t kh = 0; kh < d.kh; ++kh) {
            const std::int64_t oh = ih - (kh * d.dil_h - pad_h);
            if (oh < 0 || oh >= d.h) continue;
            for (std::int64_t kw = 0; kw < d.kw; ++kw) {
                const std::int64_t ow = iw - (kw * d.dil_w - pad_w);
                if (ow < 0 || ow >= d.w) continue;
                const T* gr = gout + ((b * d.h + oh) * d.w + ow) * d.out_c;
                const T* wr = w + (kh * d.kw + kw) * d.in_c * d.out_c;
                for (std::int64_t ci = 0; ci < d.in_c; ++ci) {
                    const T* wc = wr + ci * d.out_c;
                    T acc = T(0);
                    for (std::int64_t co = 0; co < d.out_c; ++co) acc += gr[co] * wc[co];
                    g[ci] += acc;
                }
            }
        }
    });
}

template <typename Par, typename T>
void conv2d_backward_weights(const ConvDims& d, const T* x, const T* gout, T* gw) {
    const std::int64_t pad_h = d.dil_h * (d.kh - 1) / 2;
    const std::int64_t pad_w = d.dil_w * (d.kw - 1) / 2;
    const std::int64_t slots = d.kh * d.kw * d.in_c;
    Par::run(slots, [&](std::int64_t s) {
        const std::int64_t kh = s / (d.kw * d.in_c);
        const std::int64_t kw = (s / d.in_c) % d.kw;
        const std::int64_t ci = s % d.in_c;
        T* g = gw + s * d.out_c;
        for (std::int64_t co = 0; co < d.out_c; ++co) g[co] = T(0);
        for (std::int64_t b = 0; b < d.batch; ++b) {
            for (std::int64_t oh = 0; oh < d.h; ++oh) {
                const std::int64_t ih = oh + kh * d.dil_h - pad_h;
                if (ih < 0 || ih >= d.h) continue;
                for (std::int64_t ow = 0; ow < d.w; ++ow) {
                    const std::int64_t iw = ow + kw * d.dil_w - pad_w;
                    if (iw < 0 || iw >= d.w) continue;
                    const T xv = x[((b * d.h + ih) * d.w + iw) * d.in_c + ci];
                    const T* gr = gout + ((b * d.h + oh) * d.w + ow) * d.out_c;
                    for (std::int64_t co = 0; co < d.out_c; ++co) g[co] += xv * gr[co];
                }
            }
        }
    });
}

template <typename Par, typename T>
void conv2d_backward_bias(const ConvDims& d, const T* gout, T* gb) {
    const std::int64_t positions = d.batch * d.h * d.w;
    Par::run(d.out_c, [&](std::int64_t co) {
        T acc = T(0);
        for (std::int64_t p = 0; p < positions; ++p) acc += gout[p * d.out_c + co];
        gb[co] = acc;
    });
}

template <typename Par, typename T>
void depthwise_forward(const DepthwiseDims& d, const T* x, const T* w, const T* bias, T* out) {
    const std::int64_t pad_h = d.dil_h * (d.kh - 1) / 2;
    const std::int64_t pad_w = d.dil_w * (d.kw - 1) / 2;
    const std::int64_t out_c = d.in_c * d.mult;
    const std::int64_t positions = d.batch * d.h * d.w;
    Par::run(positions, [&](std::int64_t p) {
        const std::int64_t b = p / (d.h * d.w);
        const std::int64_t oh = (p / d.w) % d.h;
        const std::int64_t ow = p % d.w;
        T* o = out + p * out_c;
        for (std::int64_t c = 0; c < out_c; ++c) o[c] = bias ? bias[c] : T(0);
        for (std::int64_t kh = 0; kh < d.kh; ++kh) {
            const std::int64_t ih = oh + kh * d.dil_h - pad_h;
            if (ih < 0 || ih >= d.h) continue;
            for (std::int64_t kw = 0; kw < d.kw; ++kw) {
                const std::int64_t iw = ow + kw * d.dil_w - pad_w;
                if (iw < 0 || iw >= d.w) continue;
                const T* xr = x + ((b * d.h + ih) * d.w + iw) * d.in_c;
                const T* wr = w + (kh * d.kw + kw) * d.in_c * d.mult;
                for (std::int64_t ci = 0; ci < d.in_c; ++ci)
                    for (std::int64_t m = 0; m < d.mult; ++m)
                        o[ci * d.mult + m] += xr[ci] * wr[ci * d.mult + m];
            }
        }
    });
}

template <typename Par, typename T>
void depthwise_backward_input(const DepthwiseDims& d, const T* gout, const T* w, T* gx) {
    const std::int64_t pad_h = d.dil_h * (d.kh - 1) / 2;
    const std::int64_t pad_w = d.dil_w * (d.kw - 1) / 2;
    const std::int64_t positions = d.batch * d.h * d.w;
    Par::run(positions, [&](std::int64_t p) {
        const std::int64_t b = p / (d.h * d.w);
        const std::int64_t ih = (p / d.w) % d.h;
        const std::int64_t iw = p % d.w;
        T* g = gx + p * d.in_c;
        for (std::int64_t ci = 0; ci < d.in_c; ++ci) g[ci] = T(0);
        for (std::int64_t kh = 0; kh < d.kh; ++kh) {
            const std::int64_t oh = ih - (kh * d.dil_h - pad_h);
            if (oh < 0 || oh >= d.h) continue;
            for (std::int64_t kw = 0; kw < d.kw; ++kw) {
                const std::int64_t ow = iw - (kw * d.dil_w - pad_w);
                if (ow < 0 || ow >= d.w) continue;
                const T* gr = gout + ((b * d.h + oh) * d.w + ow) * d.in_c * d.mult;
                const T* wr = w + (kh * d.kw + kw) * d.in_c * d.mult;
                for (std::int64_t ci = 0; ci < d.in_c; ++ci) {
                    T acc = T(0);
                    for (std::int64_t m = 0; m < d.mult; ++m)
                        acc += gr[ci * d.mult + m] * wr[ci * d.mult + m];
                    g[ci] += acc;
                }
            }
        }
    });
}

template <typename Par, typename T>
void depthwise_backward_weights(const DepthwiseDims& d, const T* x, const T* gout, T* gw) {
    const std::int64_t pad_h = d.dil_h * (d.kh - 1) / 2;
    const std::int64_t pad_w = d.dil_w * (d.kw - 1) / 2;
    const std::int64_t slots = d.kh * d.kw * d.in_c * d.mult;
    Par::run(slots, [&](std::int64_t s) {
        const std::int64_t kh = s / (d.kw * d.in_c * d.mult);
        const std::int64_t kw = (s / (d.in_c * d.mult)) % d.kw;
        const std::int64_t ci = (s / d.mult) % d.in_c;
        const std::int64_t m = s % d.mult;
        const std::int64_t out_c = d.in_c * d.mult;
        T acc = T(0);
        for (std::int64_t b = 0; b < d.batch; ++b) {
            for (std::int64_t oh = 0; oh < d.h; ++oh) {
                const std::int64_t ih = oh + kh * d.dil_h - pad_h;
                if (ih < 0 || ih >= d.h) continue;
                for (std::int64_t ow = 0; ow < d.w; ++ow) {
                    const std::int64_t iw = ow + kw * d.dil_w - pad_w;
                    if (iw < 0 || iw >= d.w) continue;
                    acc += x[((b * d.h + ih) * d.w + iw) * d.in_c + ci] *
                           gout[((b * d.h + oh) * d.w + ow) * out_c + ci * d.mult + m];
                }
            }
        }
        gw[s] = acc;
    });
}

template <typename Par, typename T>
void depthwise_backward_bias(const DepthwiseDims& d, const T* gout, T* gb) {
    const std::int64_t out_c = d.in_c * d.mult;
    const std::int64_t positions = d.batch * d.h * d.w;
    Par::run(out_c, [&](std::int64_t c) {
        T acc = T(0);
        for (std::int64_t p = 0; p < positions; ++p) acc += gout[p * out_c + c];
        gb[c] = acc;
    });
}

template <typename Par, typename T>
void layernorm_forward(std::int64_t rows, std::int64_t c, T eps, const T* x, const T* gamma,
                       const T* beta, T* out, T* mean, T* rstd) {
    Par::run(rows, [&](std::int64_t r) {
        const T* xr = x + r * c;
        T mu = T(0);
        for (std::int64_t i = 0; i < c; ++i) mu += xr[i];
        mu /= static_cast<T>(c);
        T var = T(0);
        for (std::int64_t i = 0; i < c; ++i) {
            const T dv = xr[i] - mu;
            var += dv * dv;
        }
        var /= static_cast<T>(c);
        const T rs = T(1) / std::sqrt(var + eps);
        mean[r] = mu;
        rstd[r] = rs;
        T* o = out + r * c;
        for (std::int64_t i = 0; i < c; ++i) o[i] = gamma[i] * ((xr[i] - mu) * rs) + beta[i];
    });
}

template <typename Par, typename T>
void layernorm_backward(std::int64_t rows, std::int64_t c, const T* x, const T* gamma,
                        const T* mean, const T* rstd, const T* gout, T* gx, T* ggamma, T* gbeta) {
    Par::run(rows, [&](std::int64_t r) {
        const T* xr = x + r * c;
        const T* gr = gout + r * c;
        const T mu = mean[r];
        const T rs = rstd[r];
        T sum_g = T(0), sum_gx = T(0);
        for (std::int64_t i = 0; i < c; ++i) {
            const T gi = gr[i] * gamma[i];
            sum_g += gi;
            sum_gx += gi * (xr[i] - mu) * rs;
        }
        const T inv_c = T(1) / static_cast<T>(c);
        T* g = gx + r * c;
        for (std::int64_t i = 0; i < c; ++i) {
            const T xhat = (xr[i] - mu) * rs;
            const T gi = gr[i] * gamma[i];
            g[i] = rs * (gi - inv_c * sum_g - xhat * inv_c * sum_gx);
        }
    });
    Par::run(c, [&](std::int64_t i) {
        T sg = T(0), sb = T(0);
        for (std::int64_t r = 0; r < rows; ++r) {
            const T xhat = (x[r * c + i] - mean[r]) * rstd[r];
            sg += gout[r * c + i] * xhat;
            sb += gout[r * c + i];
        }
        ggamma[i] = sg;
        gbeta[i] = sb;
    });
}

}  // namespace nrx::kernels::impl
