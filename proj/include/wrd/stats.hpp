#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wrd {

/// Multi-bit watermark payload.
struct BitMessage {
    std::vector<std::uint8_t> bits;  // each 0 or 1

    int n_bits() const { return static_cast<int>(bits.size()); }

    std::string to_hex() const;
    static BitMessage from_hex(const std::string& hex, int n_bits);
    static BitMessage random(std::uint64_t seed, int n_bits);
};

/// Probability of observing a bit accuracy at least as extreme under the
/// null hypothesis that every decoded bit is a fair coin.
struct RhoValue {
    double value = 1.0;      // in (0, 1]
    int n_bits = 0;
    double bit_accuracy = 0.0;
};

/// Fraction of matching positions. Throws on length mismatch or empty input.
double bit_accuracy(const BitMessage& m, const BitMessage& m_hat);

/// Regularized incomplete beta function I_x(a,b), continued-fraction
/// evaluation with the symmetry I_x(a,b) = 1 - I_{1-x}(b,a). Accurate to
/// ~1e-13 absolute over the domain x in [0,1], a,b > 0.
double reg_inc_beta(double x, double a, double b);

/// P[Binomial(n_bits, 1/2) >= ceil(n_bits * p)], evaluated as
/// I_{1/2}(k, n_bits - k + 1) with k = ceil(n_bits * p); k == 0 returns 1.
RhoValue rho_value(int n_bits, double p);

/// True iff the watermark is no longer detected at the operating threshold
/// (strict inequality).
bool attack_success(const RhoValue& rho, double threshold = 1e-6);

/// Mean of attack_success indicators; throws on an empty sequence.
double asr(const std::vector<RhoValue>& rhos, double threshold = 1e-6);

}  // namespace wrd
