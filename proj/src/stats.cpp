#include "wrd/stats.hpp"

#include <cmath>
#include <stdexcept>

#include "wrd/rng.hpp"

namespace wrd {

std::string BitMessage::to_hex() const {
    static const char digits[] = "0123456789abcdef";
    const int n = n_bits();
    std::string hex((n + 3) / 4, '0');
    for (int i = 0; i < n; ++i) {
        if (!bits[i]) continue;
        // bit i is the (3 - i%4)-weight bit of nibble i/4, MSB first
        const int nibble = i / 4;
        const int weight = 3 - (i % 4);
        int v = hex[nibble] <= '9' ? hex[nibble] - '0' : hex[nibble] - 'a' + 10;
        v |= 1 << weight;
        hex[nibble] = digits[v];
    }
    return hex;
}

BitMessage BitMessage::from_hex(const std::string& hex, int n_bits) {
    if (n_bits < 1) throw std::invalid_argument("message must have at least one bit");
    if (static_cast<int>(hex.size()) != (n_bits + 3) / 4)
        throw std::invalid_argument("hex length does not match bit count");
    BitMessage msg;
    msg.bits.resize(n_bits, 0);
    for (int i = 0; i < n_bits; ++i) {
        const char c = hex[i / 4];
        int v;
        if (c >= '0' && c <= '9') v = c - '0';
        else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
        else throw std::invalid_argument("invalid hex digit in message");
        msg.bits[i] = static_cast<std::uint8_t>((v >> (3 - i % 4)) & 1);
    }
    return msg;
}

BitMessage BitMessage::random(std::uint64_t seed, int n_bits) {
    if (n_bits < 1) throw std::invalid_argument("message must have at least one bit");
    Rng rng(seed);
    BitMessage msg;
    msg.bits.resize(n_bits);
    for (auto& b : msg.bits) b = rng.next_bool() ? 1 : 0;
    return msg;
}

double bit_accuracy(const BitMessage& m, const BitMessage& m_hat) {
    if (m.n_bits() == 0) throw std::invalid_argument("empty message");
    if (m.n_bits() != m_hat.n_bits())
        throw std::invalid_argument("message length mismatch");
    int matches = 0;
    for (int i = 0; i < m.n_bits(); ++i)
        if (m.bits[i] == m_hat.bits[i]) ++matches;
    return static_cast<double>(matches) / m.n_bits();
}

namespace {

// Modified Lentz continued fraction for I_x(a,b); Numerical Recipes form.
double beta_cont_frac(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double frac = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double num = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + num * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + num / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        frac *= d * c;
        num = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + num * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + num / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        frac *= delta;
        if (std::abs(delta - 1.0) < kEps) break;
    }
    return frac;
}

}  // namespace

double reg_inc_beta(double x, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("reg_inc_beta requires a > 0 and b > 0");
    if (!(x >= 0.0 && x <= 1.0))
        throw std::invalid_argument("reg_inc_beta requires x in [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;

    const double log_prefix = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                              a * std::log(x) + b * std::log1p(-x);
    const double prefix = std::exp(log_prefix);
    if (x < (a + 1.0) / (a + b + 2.0))
        return prefix * beta_cont_frac(a, b, x) / a;
    return 1.0 - prefix * beta_cont_frac(b, a, 1.0 - x) / b;
}

RhoValue rho_value(int n_bits, double p) {
    if (n_bits < 1) throw std::invalid_argument("rho_value requires n_bits >= 1");
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("rho_value requires p in [0,1]");

    // ceil with a snap so p given as matches/n never lands on the wrong side
    const double kr = p * static_cast<double>(n_bits);
    int k = static_cast<int>(std::ceil(kr - 1e-9 * std::max(1.0, kr)));
    if (k < 0) k = 0;
    if (k > n_bits) k = n_bits;

    RhoValue rho;
    rho.n_bits = n_bits;
    rho.bit_accuracy = p;
    rho.value = (k == 0) ? 1.0 : reg_inc_beta(0.5, k, n_bits - k + 1.0);
    return rho;
}

bool attack_success(const RhoValue& rho, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw std::invalid_argument("threshold must be in (0,1)");
    return rho.value > threshold;
}

double asr(const std::vector<RhoValue>& rhos, double threshold) {
    if (rhos.empty()) throw std::invalid_argument("asr requires a non-empty sequence");
    int successes = 0;
    for (const auto& rho : rhos)
        if (attack_success(rho, threshold)) ++successes;
    return static_cast<double>(successes) / rhos.size();
}

}  // namespace wrd
