#include "sne/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

#include "sne/common.hpp"

namespace sne {

namespace {

using i64 = std::int64_t;

void require_input(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw ValidationError("kendall tau: size mismatch " + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()));
    if (a.size() < 2) throw ValidationError("kendall tau: need at least 2 observations");
}

// Shared final expression: τ = S / (√(n0−n1)·√(n0−n2)). Keeping it in one
// place guarantees the brute-force and fast paths agree bit-for-bit whenever
// their integer statistics agree.
double tau_from_counts(i64 s, i64 n0, i64 n1, i64 n2) {
    if (n1 == n0 || n2 == n0)
        throw ValidationError("kendall tau undefined: one input is entirely tied");
    return static_cast<double>(s) /
           (std::sqrt(static_cast<double>(n0 - n1)) * std::sqrt(static_cast<double>(n0 - n2)));
}

i64 tie_term(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    i64 total = 0;
    std::size_t i = 0;
    while (i < values.size()) {
        std::size_t j = i;
        while (j < values.size() && values[j] == values[i]) ++j;
        i64 t = static_cast<i64>(j - i);
        total += t * (t - 1) / 2;
        i = j;
    }
    return total;
}

// Strict inversions (pairs i<j with v[i] > v[j]) via merge sort.
i64 count_inversions(std::vector<double>& v) {
    std::size_t n = v.size();
    std::vector<double> buf(n);
    i64 inv = 0;
    for (std::size_t width = 1; width < n; width *= 2) {
        for (std::size_t lo = 0; lo + width < n; lo += 2 * width) {
            std::size_t mid = lo + width;
            std::size_t hi = std::min(lo + 2 * width, n);
            std::size_t i = lo, j = mid, k = lo;
            while (i < mid && j < hi) {
                if (v[j] < v[i]) {
                    inv += static_cast<i64>(mid - i);
                    buf[k++] = v[j++];
                } else {
                    buf[k++] = v[i++];
                }
            }
            while (i < mid) buf[k++] = v[i++];
            while (j < hi) buf[k++] = v[j++];
            std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo),
                      buf.begin() + static_cast<std::ptrdiff_t>(hi),
                      v.begin() + static_cast<std::ptrdiff_t>(lo));
        }
    }
    return inv;
}

}  // namespace

double kendall_tau_brute(const std::vector<double>& a, const std::vector<double>& b) {
    require_input(a, b);
    i64 n = static_cast<i64>(a.size());
    i64 s = 0;
    for (i64 i = 0; i < n; ++i)
        for (i64 j = i + 1; j < n; ++j) {
            double da = a[static_cast<std::size_t>(i)] - a[static_cast<std::size_t>(j)];
            double db = b[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(j)];
            if (da != 0.0 && db != 0.0) s += ((da > 0.0) == (db > 0.0)) ? 1 : -1;
        }
    i64 n0 = n * (n - 1) / 2;
    return tau_from_counts(s, n0, tie_term(a), tie_term(b));
}

double kendall_tau(const std::vector<double>& a, const std::vector<double>& b) {
    require_input(a, b);
    i64 n = static_cast<i64>(a.size());
    std::vector<std::size_t> order(a.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (a[x] != a[y]) return a[x] < a[y];
        return b[x] < b[y];
    });
    // joint ties (equal in both) and ties in a, from the sorted order
    i64 n1 = 0, n3 = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && a[order[j]] == a[order[i]]) ++j;
        i64 t = static_cast<i64>(j - i);
        n1 += t * (t - 1) / 2;
        std::size_t u = i;
        while (u < j) {
            std::size_t v = u;
            while (v < j && b[order[v]] == b[order[u]]) ++v;
            i64 tb = static_cast<i64>(v - u);
            n3 += tb * (tb - 1) / 2;
            u = v;
        }
        i = j;
    }
    std::vector<double> seq(a.size());
    for (std::size_t k = 0; k < order.size(); ++k) seq[k] = b[order[k]];
    i64 discordant = count_inversions(seq);
    i64 n2 = tie_term(b);
    i64 n0 = n * (n - 1) / 2;
    i64 s = n0 - n1 - n2 + n3 - 2 * discordant;
    return tau_from_counts(s, n0, n1, n2);
}

}  // namespace sne
