// SPDX-License-Identifier: Apache-2.0
//
// fimsim: beamforming and surface-shape optimization for flexible metasurface arrays
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef FIM_BEAMFORMING_HPP
#define FIM_BEAMFORMING_HPP

#include "fim/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fim {

enum class BeamformerKind
{
    mmse,
    zf
};

inline const char *to_string(BeamformerKind kind) { return kind == BeamformerKind::mmse ? "mmse" : "zf"; }

// Raised when the SINR targets cannot be met (or the solve is too ill-conditioned to trust).
class InfeasibleError : public std::runtime_error
{
public:
    InfeasibleError(const std::string &what, double condition_number, int iterations)
        : std::runtime_error(what), condition_number_(condition_number), iterations_(iterations)
    {
    }

    double condition_number() const { return condition_number_; }
    int iterations() const { return iterations_; }

private:
    double condition_number_;
    int iterations_;
};

struct BeamformingSolution
{
    CMatrix W;           // N x K, w_k = sqrt(p_k) * direction_k
    RVector powers;      // p_k
    CMatrix directions;  // unit-norm columns, h_k^H d_k real and non-negative
    RVector multipliers; // dual uplink powers in the noise-normalized convention (MMSE only)
    double total_power = 0.0;
    BeamformerKind method = BeamformerKind::mmse;
    int fixed_point_iterations = 0;
};

struct SinrReport
{
    RVector sinr;
    RVector signal;
    RVector interference;
    RVector noise;
};

inline RVector to_rvector(std::span<const double> v)
{
    return Eigen::Map<const RVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline void check_problem(const CMatrix &H, std::span<const double> noise, std::span<const double> targets)
{
    const auto K = static_cast<size_t>(H.cols());
    if (noise.size() != K || targets.size() != K)
        throw std::invalid_argument("beamforming: noise/target count does not match the number of users.");
    for (size_t k = 0; k < K; ++k)
    {
        if (!(noise[k] > 0.0))
            throw std::invalid_argument("beamforming: noise powers must be positive.");
        if (!(targets[k] > 0.0))
            throw std::invalid_argument("beamforming: SINR targets must be positive.");
    }
}

// SINR_k = |h_k^H w_k|^2 / (sum_{k' != k} |h_k^H w_k'|^2 + sigma_k^2)
inline SinrReport sinr_report(const CMatrix &H, const CMatrix &W, std::span<const double> noise)
{
    if (H.rows() != W.rows() || H.cols() != W.cols() || static_cast<Eigen::Index>(noise.size()) != H.cols())
        throw std::invalid_argument("sinr_report: dimension mismatch.");
    const Eigen::Index K = H.cols();
    const CMatrix C = H.adjoint() * W; // C(k, k') = h_k^H w_k'

    SinrReport r;
    r.noise = to_rvector(noise);
    r.signal.resize(K);
    r.interference.resize(K);
    r.sinr.resize(K);
    for (Eigen::Index k = 0; k < K; ++k)
    {
        r.signal[k] = std::norm(C(k, k));
        double i = 0.0;
        for (Eigen::Index j = 0; j < K; ++j)
            if (j != k)
                i += std::norm(C(k, j));
        r.interference[k] = i;
        r.sinr[k] = r.signal[k] / (i + r.noise[k]);
    }
    return r;
}

namespace detail {

// Rotate every column so that h_k^H d_k is real and non-negative.
inline void align_phases(const CMatrix &H, CMatrix &D)
{
    for (Eigen::Index k = 0; k < D.cols(); ++k)
    {
        const cplx c = H.col(k).dot(D.col(k)); // Eigen's dot conjugates the first argument
        if (std::abs(c) > 0.0)
            D.col(k) *= std::conj(c) / std::abs(c);
    }
}

inline double condition_number(const CMatrix &A)
{
    Eigen::JacobiSVD<CMatrix> svd(A);
    const auto &s = svd.singularValues();
    if (s.size() == 0)
        return std::numeric_limits<double>::infinity();
    const double smin = s[s.size() - 1];
    return smin > 0.0 ? s[0] / smin : std::numeric_limits<double>::infinity();
}

inline RMatrix power_coupling_matrix(const CMatrix &H, const CMatrix &D, std::span<const double> targets)
{
    const Eigen::Index K = H.cols();
    const CMatrix C = H.adjoint() * D;
    RMatrix M(K, K);
    for (Eigen::Index k = 0; k < K; ++k)
        for (Eigen::Index j = 0; j < K; ++j)
            M(k, j) = (k == j) ? std::norm(C(k, k)) / targets[static_cast<size_t>(k)] : -std::norm(C(k, j));
    return M;
}

// Uplink powers meeting every target with receive filters U (unit uplink noise), or an empty
// vector when those filters cannot meet them.
inline RVector uplink_powers(const CMatrix &Hn, const CMatrix &U, std::span<const double> targets)
{
    const Eigen::Index K = Hn.cols();
    const CMatrix G = U.adjoint() * Hn; // G(k, j) = u_k^H h~_j
    RMatrix A(K, K);
    RVector b(K);
    for (Eigen::Index k = 0; k < K; ++k)
    {
        for (Eigen::Index j = 0; j < K; ++j)
            A(k, j) = (k == j) ? std::norm(G(k, k)) / targets[static_cast<size_t>(k)] : -std::norm(G(k, j));
        b[k] = U.col(k).squaredNorm();
    }
    Eigen::PartialPivLU<RMatrix> lu(A);
    if (!(lu.rcond() > 1e-12))
        return {};
    RVector q = lu.solve(b);
    for (Eigen::Index k = 0; k < K; ++k)
        if (!(q[k] > 0.0) || !std::isfinite(q[k]))
            return {};
    return q;
}

} // namespace detail

struct MmseOptions
{
    double fp_tol = 1e-10;
    int fp_max_iter = 20000;
    double max_multiplier = 1e12;
};

// Minimum-power beamformer meeting every SINR target with equality, via uplink-downlink duality.
//
// The dual uplink powers are found with the fixed point
//     lambda_k <- gamma_k / ((1 + gamma_k) h~_k^H S(lambda)^{-1} h~_k),  S = I + sum_k lambda_k h~_k h~_k^H,
// started from lambda = 0, where h~_k = h_k / sigma_k. Its rate approaches one at high SINR, so each
// step also tries the exact uplink powers for the current receive filters S^{-1} h~_k and takes them
// whenever they are positive. Those powers sit above the optimum and decrease towards it, so the
// iteration stays monotone once they are taken. Directions are S^{-1} h~_k normalized; the downlink
// powers then solve the K linear SINR equalities.
inline BeamformingSolution mmse_beamformer(const CMatrix &H, std::span<const double> noise,
                                           std::span<const double> targets, const MmseOptions &opt = {})
{
    check_problem(H, noise, targets);
    const Eigen::Index N = H.rows();
    const Eigen::Index K = H.cols();

    CMatrix Hn = H;
    for (Eigen::Index k = 0; k < K; ++k)
        Hn.col(k) /= std::sqrt(noise[static_cast<size_t>(k)]);

    const CMatrix I = CMatrix::Identity(N, N);
    RVector lambda = RVector::Zero(K);
    int iter = 0;
    bool converged = false;
    while (iter < opt.fp_max_iter)
    {
        ++iter;
        const CMatrix S = I + Hn * lambda.cast<cplx>().asDiagonal() * Hn.adjoint();
        const CMatrix X = S.llt().solve(Hn);
        double change = 0.0;
        RVector next(K);
        for (Eigen::Index k = 0; k < K; ++k)
        {
            const double q = Hn.col(k).dot(X.col(k)).real();
            const double g = targets[static_cast<size_t>(k)];
            next[k] = g / ((1.0 + g) * q);
            if (!std::isfinite(next[k]) || next[k] > opt.max_multiplier)
                throw InfeasibleError("mmse_beamformer: dual multiplier of user " + std::to_string(k) +
                                          " diverged after " + std::to_string(iter) + " iterations",
                                      detail::condition_number(H), iter);
            change = std::max(change, std::abs(next[k] - lambda[k]) / next[k]);
        }
        if (const RVector q = detail::uplink_powers(Hn, X, targets); q.size())
        {
            change = 0.0;
            for (Eigen::Index k = 0; k < K; ++k)
                change = std::max(change, std::abs(q[k] - lambda[k]) / q[k]);
            next = q;
        }
        lambda = next;
        if (change < opt.fp_tol)
        {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw InfeasibleError("mmse_beamformer: fixed point did not converge in " + std::to_string(iter) +
                                  " iterations",
                              detail::condition_number(H), iter);

    const CMatrix S = I + Hn * lambda.cast<cplx>().asDiagonal() * Hn.adjoint();
    CMatrix D = S.llt().solve(Hn);
    D.colwise().normalize();
    detail::align_phases(H, D);

    const RMatrix M = detail::power_coupling_matrix(H, D, targets);
    Eigen::PartialPivLU<RMatrix> lu(M);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-14))
        throw InfeasibleError("mmse_beamformer: power coupling matrix is singular (rcond " + std::to_string(rcond) +
                                  ")",
                              rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity(), iter);
    RVector p = lu.solve(to_rvector(noise));
    for (Eigen::Index k = 0; k < K; ++k)
    {
        if (p[k] < -1e-12 || !std::isfinite(p[k]))
            throw InfeasibleError("mmse_beamformer: negative power for user " + std::to_string(k), 1.0 / rcond, iter);
        p[k] = std::max(p[k], 0.0);
    }

    BeamformingSolution sol;
    sol.directions = D;
    sol.powers = p;
    sol.multipliers = lambda;
    sol.W = D * p.cwiseSqrt().cast<cplx>().asDiagonal();
    sol.total_power = p.sum();
    sol.method = BeamformerKind::mmse;
    sol.fixed_point_iterations = iter;
    return sol;
}

inline constexpr double kZfMaxCondition = 1e12;

// Zero-forcing: W = H (H^H H)^{-1} diag(gamma_k sigma_k^2)^{1/2}, evaluated through a thin QR of H.
inline BeamformingSolution zf_beamformer(const CMatrix &H, std::span<const double> noise,
                                         std::span<const double> targets)
{
    check_problem(H, noise, targets);
    const Eigen::Index N = H.rows();
    const Eigen::Index K = H.cols();
    if (K > N)
        throw std::invalid_argument("zf_beamformer: more users (" + std::to_string(K) + ") than antennas (" +
                                    std::to_string(N) + ").");
    const double cond = detail::condition_number(H);
    if (!(cond <= kZfMaxCondition))
        throw InfeasibleError("zf_beamformer: channel matrix is rank deficient (condition number " +
                                  std::to_string(cond) + ")",
                              cond, 0);

    // H = Q R  =>  H (H^H H)^{-1} = Q R^{-H}
    Eigen::HouseholderQR<CMatrix> qr(H);
    const CMatrix Q = qr.householderQ() * CMatrix::Identity(N, K);
    const CMatrix R = qr.matrixQR().topRows(K).triangularView<Eigen::Upper>();
    const CMatrix Rinv_h = R.adjoint().triangularView<Eigen::Lower>().solve<Eigen::OnTheRight>(CMatrix::Identity(K, K));
    // Rinv_h = I * R^{-H}
    CMatrix W = Q * Rinv_h;

    RVector p(K);
    for (Eigen::Index k = 0; k < K; ++k)
        W.col(k) *= std::sqrt(targets[static_cast<size_t>(k)] * noise[static_cast<size_t>(k)]);
    CMatrix D = W;
    for (Eigen::Index k = 0; k < K; ++k)
    {
        p[k] = W.col(k).squaredNorm();
        D.col(k) /= std::sqrt(p[k]);
    }
    detail::align_phases(H, D);

    BeamformingSolution sol;
    sol.directions = D;
    sol.powers = p;
    sol.multipliers = RVector::Zero(K);
    sol.W = D * p.cwiseSqrt().cast<cplx>().asDiagonal();
    sol.total_power = p.sum();
    sol.method = BeamformerKind::zf;
    return sol;
}

inline BeamformingSolution solve_beamformer(BeamformerKind kind, const CMatrix &H, std::span<const double> noise,
                                            std::span<const double> targets, const MmseOptions &opt = {})
{
    return kind == BeamformerKind::mmse ? mmse_beamformer(H, noise, targets, opt) : zf_beamformer(H, noise, targets);
}

// 10 log10(P / 1 mW). Zero power maps to -infinity.
inline double transmit_power_dbm(double watts)
{
    if (watts < 0.0)
        throw std::invalid_argument("transmit_power_dbm: negative power.");
    if (watts == 0.0)
        return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(watts) + 30.0;
}

inline double transmit_power_dbm(const BeamformingSolution &sol) { return transmit_power_dbm(sol.total_power); }

} // namespace fim

#endif
