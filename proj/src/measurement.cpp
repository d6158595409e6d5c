// Copyright 2026 The MQTM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mqtm/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace mqtm {

namespace {

void check_positions(const StateVector &state, size_t arity, const std::vector<size_t> &positions) {
    if (positions.size() != arity) {
        throw std::invalid_argument("observable arity does not match position count");
    }
    std::set<size_t> seen;
    for (size_t p : positions) {
        if (p >= state.num_qubits()) {
            throw std::out_of_range("register position out of range");
        }
        if (!seen.insert(p).second) {
            throw std::invalid_argument("repeated register position");
        }
    }
}

std::vector<cdouble> raw_amplitudes(const StateVector &s) {
    return s.amplitudes();
}

}  // namespace

void apply_matrix_at(StateVector &state, const Eigen::MatrixXcd &op,
                     const std::vector<size_t> &positions) {
    size_t k = positions.size();
    if (op.rows() != op.cols() || op.rows() != Eigen::Index(size_t{1} << k)) {
        throw std::invalid_argument("operator size does not match position count");
    }
    check_positions(state, k, positions);

    size_t n = state.num_qubits();
    std::vector<size_t> shifts(k);
    for (size_t j = 0; j < k; j++) {
        shifts[j] = n - 1 - positions[j];  // factor 0 is the most significant local bit
    }
    size_t span_mask = 0;
    for (size_t s : shifts) {
        span_mask |= size_t{1} << s;
    }

    std::vector<cdouble> amps = raw_amplitudes(state);
    size_t dim = amps.size();
    size_t local_dim = size_t{1} << k;
    std::vector<size_t> idx(local_dim);
    std::vector<cdouble> scratch(local_dim);

    for (size_t base = 0; base < dim; base++) {
        if (base & span_mask) {
            continue;
        }
        for (size_t a = 0; a < local_dim; a++) {
            size_t i = base;
            for (size_t j = 0; j < k; j++) {
                if ((a >> (k - 1 - j)) & 1) {
                    i |= size_t{1} << shifts[j];
                }
            }
            idx[a] = i;
        }
        for (size_t a = 0; a < local_dim; a++) {
            cdouble acc(0, 0);
            for (size_t b = 0; b < local_dim; b++) {
                cdouble coeff = op(Eigen::Index(a), Eigen::Index(b));
                if (coeff != cdouble(0, 0)) {
                    acc += coeff * amps[idx[b]];
                }
            }
            scratch[a] = acc;
        }
        for (size_t a = 0; a < local_dim; a++) {
            amps[idx[a]] = scratch[a];
        }
    }
    state = StateVector::raw(state.num_qubits(), std::move(amps));
}

StateVector apply_pauli(const StateVector &state, const PauliOp &pauli,
                        const std::vector<size_t> &positions) {
    if (pauli.arity() != positions.size()) {
        throw std::invalid_argument("Pauli arity does not match position count");
    }
    StateVector out = state;
    auto raw = pauli.matrix();
    size_t dim = size_t{1} << pauli.arity();
    Eigen::MatrixXcd m(dim, dim);
    for (size_t r = 0; r < dim; r++) {
        for (size_t c = 0; c < dim; c++) {
            m(r, c) = raw[r * dim + c];
        }
    }
    apply_matrix_at(out, m, positions);
    return out;
}

std::vector<OutcomeBranch> outcome_distribution(const StateVector &state, const Observable &obs,
                                                const std::vector<size_t> &positions) {
    check_positions(state, obs.arity(), positions);
    std::vector<OutcomeBranch> out;
    for (const SpectralPair &pair : obs.spectrum()) {
        StateVector projected = state;
        apply_matrix_at(projected, pair.projector, positions);
        double p = projected.norm_squared();
        if (p < kProbabilityFloor) {
            continue;
        }
        projected.renormalize();
        out.push_back({pair.eigenvalue, p, std::move(projected)});
    }
    return out;
}

std::pair<MeasurementRecord, StateVector> measure(const StateVector &state, const Observable &obs,
                                                  const std::vector<size_t> &positions,
                                                  const OutcomeChooser &chooser) {
    auto branches = outcome_distribution(state, obs, positions);
    std::vector<OutcomeOption> options;
    options.reserve(branches.size());
    for (const auto &b : branches) {
        options.push_back({b.eigenvalue, b.probability});
    }
    size_t pick = chooser(options);
    if (pick >= branches.size()) {
        throw std::runtime_error("outcome chooser returned an invalid index");
    }
    MeasurementRecord record{obs.name(), positions, branches[pick].eigenvalue,
                             branches[pick].probability};
    return {record, std::move(branches[pick].post_state)};
}

std::pair<MeasurementRecord, StateVector> measure(const StateVector &state, const Observable &obs,
                                                  const std::vector<size_t> &positions,
                                                  RandomSource &rng) {
    OutcomeChooser chooser = sampling_chooser(rng);
    return measure(state, obs, positions, chooser);
}

double single_qubit_purity(const StateVector &state, size_t position) {
    if (position >= state.num_qubits()) {
        throw std::out_of_range("register position out of range");
    }
    size_t shift = state.num_qubits() - 1 - position;
    double r00 = 0.0, r11 = 0.0;
    cdouble r01(0, 0);
    const auto &amps = state.amplitudes();
    for (size_t i = 0; i < amps.size(); i++) {
        if ((i >> shift) & 1) {
            r11 += std::norm(amps[i]);
        } else {
            r00 += std::norm(amps[i]);
            r01 += amps[i] * std::conj(amps[i | (size_t{1} << shift)]);
        }
    }
    return r00 * r00 + r11 * r11 + 2.0 * std::norm(r01);
}

namespace {

// Gram matrix of the state reshaped as (subset) x (rest).
Eigen::MatrixXcd subset_gram(const StateVector &state, const std::vector<size_t> &positions) {
    check_positions(state, positions.size(), positions);
    size_t n = state.num_qubits();
    size_t w = positions.size();
    std::vector<size_t> rest;
    std::vector<bool> in_subset(n, false);
    for (size_t p : positions) {
        in_subset[p] = true;
    }
    for (size_t q = 0; q < n; q++) {
        if (!in_subset[q]) {
            rest.push_back(q);
        }
    }
    size_t wd = size_t{1} << w;
    size_t rd = size_t{1} << rest.size();
    Eigen::MatrixXcd m(wd, rd);
    for (size_t a = 0; a < wd; a++) {
        for (size_t b = 0; b < rd; b++) {
            size_t i = 0;
            for (size_t j = 0; j < w; j++) {
                if ((a >> (w - 1 - j)) & 1) {
                    i |= size_t{1} << (n - 1 - positions[j]);
                }
            }
            for (size_t j = 0; j < rest.size(); j++) {
                if ((b >> (rest.size() - 1 - j)) & 1) {
                    i |= size_t{1} << (n - 1 - rest[j]);
                }
            }
            m(a, b) = state.amplitude(i);
        }
    }
    return m * m.adjoint();
}

}  // namespace

double subset_purity(const StateVector &state, const std::vector<size_t> &positions) {
    if (positions.size() == state.num_qubits()) {
        return 1.0;
    }
    Eigen::MatrixXcd rho = subset_gram(state, positions);
    return (rho * rho).trace().real();
}

StateVector extract_subregister(const StateVector &state, const std::vector<size_t> &positions,
                                double tol) {
    check_positions(state, positions.size(), positions);
    if (positions.size() == state.num_qubits()) {
        // Whole register: reorder qubits according to `positions`.
        size_t n = state.num_qubits();
        std::vector<cdouble> amps(state.dim());
        for (size_t a = 0; a < amps.size(); a++) {
            size_t i = 0;
            for (size_t j = 0; j < n; j++) {
                if ((a >> (n - 1 - j)) & 1) {
                    i |= size_t{1} << (n - 1 - positions[j]);
                }
            }
            amps[a] = state.amplitude(i);
        }
        StateVector out(n, amps);
        return out;
    }
    Eigen::MatrixXcd rho = subset_gram(state, positions);
    double purity = (rho * rho).trace().real();
    if (purity < 1.0 - tol) {
        throw std::runtime_error("subregister is entangled with the remainder");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho);
    Eigen::VectorXcd top = solver.eigenvectors().col(rho.rows() - 1);
    // Fix the global phase: largest amplitude real positive.
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < top.size(); i++) {
        if (std::abs(top(i)) > std::abs(top(best))) {
            best = i;
        }
    }
    cdouble phase = top(best) / std::abs(top(best));
    top /= phase;
    std::vector<cdouble> amps(top.data(), top.data() + top.size());
    double n2 = 0;
    for (auto &a : amps) {
        n2 += std::norm(a);
    }
    double scale = std::sqrt(n2);
    for (auto &a : amps) {
        a /= scale;
    }
    return StateVector(positions.size(), amps);
}

StateVector reset_qubits_to_zero(const StateVector &state, const std::vector<size_t> &positions,
                                 double tol) {
    if (positions.empty()) {
        return state;
    }
    size_t n = state.num_qubits();
    size_t junk_mask = 0;
    for (size_t p : positions) {
        if (p >= n) {
            throw std::out_of_range("register position out of range");
        }
        junk_mask |= size_t{1} << (n - 1 - p);
    }
    const auto &amps = state.amplitudes();
    // Rank-1 factorization across the junk/rest cut: amp[a|j] must equal
    // v[a]·w[j]/amp[m] with m the dominant index. O(dim), no eigensolve.
    size_t m = 0;
    for (size_t i = 1; i < amps.size(); i++) {
        if (std::norm(amps[i]) > std::norm(amps[m])) {
            m = i;
        }
    }
    cdouble pivot = amps[m];
    size_t am = m & ~junk_mask, jm = m & junk_mask;
    double vnorm2 = 0;
    for (size_t i = 0; i < amps.size(); i++) {
        cdouble predicted = amps[(i & ~junk_mask) | jm] * amps[am | (i & junk_mask)] / pivot;
        if (std::abs(predicted - amps[i]) > tol) {
            throw std::runtime_error("junk qubits are entangled with the remainder");
        }
        if ((i & junk_mask) == jm) {
            vnorm2 += std::norm(amps[i]);
        }
    }
    std::vector<cdouble> out(amps.size(), cdouble(0, 0));
    double scale = std::sqrt(vnorm2);
    for (size_t i = 0; i < amps.size(); i++) {
        if ((i & junk_mask) == jm) {
            out[i & ~junk_mask] = amps[i] / scale;
        }
    }
    return StateVector::raw(n, std::move(out));
}

double fidelity_up_to_global_phase(const StateVector &a, const StateVector &b) {
    return std::abs(inner_product(a, b));
}

StateVector haar_random_qubit(RandomSource &rng) {
    double u1 = rng.next_double();
    double u2 = rng.next_double();
    double theta = std::acos(1.0 - 2.0 * u1);
    double phi = 2.0 * std::numbers::pi * u2;
    std::vector<cdouble> amps{std::cos(theta / 2.0),
                              std::polar(std::sin(theta / 2.0), phi)};
    // Guard rounding at the poles.
    double n = std::sqrt(std::norm(amps[0]) + std::norm(amps[1]));
    amps[0] /= n;
    amps[1] /= n;
    return StateVector(1, amps);
}

}  // namespace mqtm
