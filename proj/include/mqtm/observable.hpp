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

#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <vector>

namespace mqtm {

struct SpectralPair {
    double eigenvalue;
    Eigen::MatrixXcd projector;
};

/// Spectral decomposition of a Hermitian matrix. Eigenvalues closer than
/// 1e-9 are merged into one projector; pairs are sorted by descending
/// eigenvalue. Throws std::invalid_argument for non-Hermitian input.
std::vector<SpectralPair> spectral_decompose(const Eigen::MatrixXcd &hermitian);

/// Hermitian operator with its spectral decomposition.
class Observable {
   public:
    /// Decomposes numerically (see spectral_decompose).
    Observable(std::string name, Eigen::MatrixXcd matrix);
    /// Uses a trusted, exactly constructed spectrum.
    Observable(std::string name, Eigen::MatrixXcd matrix, std::vector<SpectralPair> spectrum);

    const std::string &name() const { return name_; }
    size_t arity() const { return arity_; }
    const Eigen::MatrixXcd &matrix() const { return matrix_; }
    const std::vector<SpectralPair> &spectrum() const { return spectrum_; }

   private:
    std::string name_;
    size_t arity_;
    Eigen::MatrixXcd matrix_;
    std::vector<SpectralPair> spectrum_;
};

/// Canonical name of a builtin observable ("X⊗Z" -> "XZ"). Throws
/// std::invalid_argument for unknown names.
std::string canonical_observable_name(std::string_view name);

/// Looks up an observable by name. Recognized forms: tensor strings over
/// {I,X,Y,Z} of length 1 or 2 (optionally written with ⊗), and the two
/// rotated observables "XX+YX" = (X⊗X+Y⊗X)/√2 and "XX+XY" = (X⊗X+X⊗Y)/√2.
/// Spectra of builtins are constructed in closed form, not diagonalized.
const Observable &builtin_observable(std::string_view name);

}  // namespace mqtm
