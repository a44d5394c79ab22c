#pragma once
// Dense statevector simulator covering exactly the gate set of the ZZ
// feature-map encoding circuit: Hadamard, single-qubit phase and two-qubit
// ZZ phase. Qubit 0 is the least-significant bit of the basis-state index.

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "starsvm/errors.hpp"

namespace starsvm {

using Complex = std::complex<double>;

inline constexpr std::size_t kMaxQubits = 20;  // 2^20 amplitudes ~ 16 MiB

class StateVector {
public:
    explicit StateVector(std::size_t n_qubits) : n_qubits_(n_qubits) {
        if (n_qubits < 1 || n_qubits > kMaxQubits)
            throw ValidationError("qubit count out of range [1, " + std::to_string(kMaxQubits) +
                                  "]: " + std::to_string(n_qubits));
        amps_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
        amps_[0] = Complex{1.0, 0.0};
    }

    std::size_t n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return amps_.size(); }
    std::span<const Complex> amplitudes() const { return amps_; }

    Complex amplitude(std::size_t basis_state) const { return amps_.at(basis_state); }

    double norm_squared() const {
        double s = 0.0;
        for (const auto& a : amps_) s += std::norm(a);
        return s;
    }

    void apply_hadamard(std::size_t qubit) {
        check_qubit(qubit);
        constexpr double inv_sqrt2 = 0.70710678118654752440;
        const std::size_t step = std::size_t{1} << qubit;
        for (std::size_t base = 0; base < amps_.size(); base += step << 1) {
            for (std::size_t off = 0; off < step; ++off) {
                const std::size_t i0 = base + off;
                const std::size_t i1 = i0 + step;
                const Complex a = amps_[i0];
                const Complex b = amps_[i1];
                amps_[i0] = (a + b) * inv_sqrt2;
                amps_[i1] = (a - b) * inv_sqrt2;
            }
        }
    }

    // Amplitudes with the qubit set pick up exp(i*angle).
    void apply_phase(std::size_t qubit, double angle) {
        check_qubit(qubit);
        check_angle(angle);
        const Complex phase = std::polar(1.0, angle);
        const std::size_t step = std::size_t{1} << qubit;
        for (std::size_t base = 0; base < amps_.size(); base += step << 1)
            for (std::size_t off = 0; off < step; ++off) amps_[base + off + step] *= phase;
    }

    // Amplitudes with both qubits set pick up exp(i*angle); symmetric in
    // (q1, q2).
    void apply_zz_phase(std::size_t q1, std::size_t q2, double angle) {
        check_qubit(q1);
        check_qubit(q2);
        check_angle(angle);
        if (q1 == q2) throw std::invalid_argument("zz phase needs two distinct qubits");
        const Complex phase = std::polar(1.0, angle);
        const std::size_t mask = (std::size_t{1} << q1) | (std::size_t{1} << q2);
        for (std::size_t i = 0; i < amps_.size(); ++i)
            if ((i & mask) == mask) amps_[i] *= phase;
    }

private:
    void check_qubit(std::size_t qubit) const {
        if (qubit >= n_qubits_)
            throw std::out_of_range("qubit index " + std::to_string(qubit) + " out of range for " +
                                    std::to_string(n_qubits_) + " qubits");
    }

    static void check_angle(double angle) {
        if (!std::isfinite(angle)) throw std::invalid_argument("gate angle must be finite");
    }

    std::size_t n_qubits_;
    std::vector<Complex> amps_;
};

inline StateVector new_zero_state(std::size_t n_qubits) { return StateVector(n_qubits); }

inline Complex inner_product(const StateVector& a, const StateVector& b) {
    if (a.n_qubits() != b.n_qubits())
        throw std::invalid_argument("inner product needs equal qubit counts");
    const auto pa = a.amplitudes();
    const auto pb = b.amplitudes();
    Complex acc{0.0, 0.0};
    for (std::size_t k = 0; k < pa.size(); ++k) acc += std::conj(pa[k]) * pb[k];
    return acc;
}

}  // namespace starsvm
