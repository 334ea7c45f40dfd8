#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace nkspec::detail {

// In-place v[i] <- (v[i] - v[i + step]) / scale, shrinking by `step`.
template <class T>
void difference_pass(std::vector<T>& v, std::size_t step, int scale) {
    const std::size_t n = v.size() - step;
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = (v[i] - v[i + step]) / scale;
    }
    v.resize(n);
}

template <class T>
void average_pass(std::vector<T>& v) {
    const std::size_t n = v.size() - 1;
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = (v[i] + v[i + 1]) / 2;
    }
    v.resize(n);
}

// μ_k from the grid Φ(1 - 2r/d), r = 0..d.  The 2^-d factor is spread over
// the passes: /4 per 2Δ-difference, /2 per Δ-average or Δ-difference.
// `check` sees every difference table (used for debug nonnegativity checks).
template <class T, class Check>
T mu_stable(std::vector<T> v, int d, int k, Check&& check) {
    if (2 * k <= d) {
        // 2^-d (I+T)^(d-2k) (I-T_2)^k Φ(1)
        for (int i = 0; i < k; ++i) {
            difference_pass(v, 2, 4);
            check(v);
        }
        for (int i = 0; i < d - 2 * k; ++i) {
            average_pass(v);
        }
    } else {
        // 2^-d (I-T)^(2k-d) (I-T_2)^(d-k) Φ(1)
        for (int i = 0; i < d - k; ++i) {
            difference_pass(v, 2, 4);
            check(v);
        }
        for (int i = 0; i < 2 * k - d; ++i) {
            difference_pass(v, 1, 2);
            check(v);
        }
    }
    assert(v.size() == 1);
    return v.front();
}

}  // namespace nkspec::detail
