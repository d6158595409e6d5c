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

#include "mqtm/observable.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "mqtm/pauli.hpp"

namespace mqtm {

namespace {

bool is_power_of_two(size_t n) {
    return n != 0 && (n & (n - 1)) == 0;
}

size_t log2_exact(size_t n) {
    size_t k = 0;
    while ((size_t{1} << k) < n) {
        k++;
    }
    return k;
}

Eigen::MatrixXcd pauli_dense(Pauli p) {
    Eigen::MatrixXcd m(2, 2);
    auto v = pauli_matrix(p);
    m << v[0], v[1], v[2], v[3];
    return m;
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd &a, const Eigen::MatrixXcd &b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); i++) {
        for (Eigen::Index j = 0; j < a.cols(); j++) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

// Spectrum of a single-qubit Hermitian involution (all builtins factor into
// these): projectors (I ± M)/2.
std::vector<SpectralPair> involution_spectrum(const Eigen::MatrixXcd &m) {
    Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(2, 2);
    return {{+1.0, (id + m) / 2.0}, {-1.0, (id - m) / 2.0}};
}

std::vector<SpectralPair> identity_spectrum(size_t dim) {
    return {{+1.0, Eigen::MatrixXcd::Identity(dim, dim)}};
}

// Combines factor spectra into the spectrum of the tensor product, merging
// equal eigenvalue products.
std::vector<SpectralPair> tensor_spectrum(const std::vector<SpectralPair> &a,
                                          const std::vector<SpectralPair> &b) {
    std::map<double, Eigen::MatrixXcd, std::greater<double>> buckets;
    for (const auto &pa : a) {
        for (const auto &pb : b) {
            double ev = pa.eigenvalue * pb.eigenvalue;
            Eigen::MatrixXcd proj = kron(pa.projector, pb.projector);
            auto it = buckets.find(ev);
            if (it == buckets.end()) {
                buckets.emplace(ev, proj);
            } else {
                it->second += proj;
            }
        }
    }
    std::vector<SpectralPair> out;
    for (auto &kv : buckets) {
        out.push_back({kv.first, kv.second});
    }
    return out;
}

}  // namespace

std::vector<SpectralPair> spectral_decompose(const Eigen::MatrixXcd &m) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument("matrix must be square");
    }
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
        throw std::invalid_argument("matrix is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("eigendecomposition failed");
    }
    const auto &evals = solver.eigenvalues();
    const auto &evecs = solver.eigenvectors();

    std::vector<SpectralPair> out;
    // Eigen returns eigenvalues ascending; walk from the top and merge
    // values within 1e-9 (degenerate observables split under roundoff).
    for (Eigen::Index i = m.rows() - 1; i >= 0;) {
        double ev = evals(i);
        Eigen::MatrixXcd proj = Eigen::MatrixXcd::Zero(m.rows(), m.cols());
        double sum = 0.0;
        int count = 0;
        Eigen::Index j = i;
        while (j >= 0 && std::abs(evals(j) - ev) <= 1e-9) {
            proj += evecs.col(j) * evecs.col(j).adjoint();
            sum += evals(j);
            count++;
            j--;
        }
        out.push_back({sum / count, proj});
        i = j;
    }
    return out;
}

Observable::Observable(std::string name, Eigen::MatrixXcd matrix)
    : Observable(std::move(name), matrix, spectral_decompose(matrix)) {}

Observable::Observable(std::string name, Eigen::MatrixXcd matrix, std::vector<SpectralPair> spectrum)
    : name_(std::move(name)), matrix_(std::move(matrix)), spectrum_(std::move(spectrum)) {
    if (!is_power_of_two(static_cast<size_t>(matrix_.rows())) || matrix_.rows() != matrix_.cols()) {
        throw std::invalid_argument("observable matrix must be square with power-of-two size");
    }
    arity_ = log2_exact(static_cast<size_t>(matrix_.rows()));
}

std::string canonical_observable_name(std::string_view name) {
    std::string s;
    // Strip any UTF-8 ⊗ (0xE2 0x8A 0x97) separators.
    for (size_t i = 0; i < name.size();) {
        if (i + 2 < name.size() && static_cast<unsigned char>(name[i]) == 0xE2 &&
            static_cast<unsigned char>(name[i + 1]) == 0x8A &&
            static_cast<unsigned char>(name[i + 2]) == 0x97) {
            i += 3;
            continue;
        }
        s += name[i];
        i++;
    }
    if (s == "XX+YX" || s == "XX+XY") {
        return s;
    }
    if (s.size() >= 1 && s.size() <= 2) {
        for (char c : s) {
            if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') {
                throw std::invalid_argument("unknown observable name: " + std::string(name));
            }
        }
        return s;
    }
    throw std::invalid_argument("unknown observable name: " + std::string(name));
}

namespace {

Observable build_builtin(const std::string &canon) {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    if (canon == "XX+YX" || canon == "XX+XY") {
        // (X+Y)/√2 is a Hermitian involution; both rotated observables are
        // tensor products with it.
        Eigen::MatrixXcd w = (pauli_dense(Pauli::X) + pauli_dense(Pauli::Y)) * inv_sqrt2;
        Eigen::MatrixXcd x = pauli_dense(Pauli::X);
        Eigen::MatrixXcd m = canon == "XX+YX" ? kron(w, x) : kron(x, w);
        auto spec = canon == "XX+YX" ? tensor_spectrum(involution_spectrum(w), involution_spectrum(x))
                                     : tensor_spectrum(involution_spectrum(x), involution_spectrum(w));
        return Observable(canon, m, spec);
    }
    auto single = [](char c) {
        Pauli p = pauli_from_char(c);
        Eigen::MatrixXcd m = pauli_dense(p);
        return p == Pauli::I ? std::make_pair(m, identity_spectrum(2))
                             : std::make_pair(m, involution_spectrum(m));
    };
    auto [m0, s0] = single(canon[0]);
    if (canon.size() == 1) {
        return Observable(canon, m0, s0);
    }
    auto [m1, s1] = single(canon[1]);
    return Observable(canon, kron(m0, m1), tensor_spectrum(s0, s1));
}

}  // namespace

const Observable &builtin_observable(std::string_view name) {
    static std::map<std::string, Observable> cache;
    static std::mutex mutex;
    std::string canon = canonical_observable_name(name);
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(canon);
    if (it == cache.end()) {
        it = cache.emplace(canon, build_builtin(canon)).first;
    }
    return it->second;
}

}  // namespace mqtm
