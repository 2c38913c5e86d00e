#pragma once

#include <vector>

namespace sne {

// Kendall's τ-b (tie-corrected) rank correlation. Both entry points compute
// identical integer pair statistics and share one final expression, so they
// agree bit-for-bit. Throws ValidationError for n < 2 or when either side is
// entirely tied (undefined denominator).
double kendall_tau_brute(const std::vector<double>& a, const std::vector<double>& b);  // O(n²)
double kendall_tau(const std::vector<double>& a, const std::vector<double>& b);        // O(n log n)

}  // namespace sne
