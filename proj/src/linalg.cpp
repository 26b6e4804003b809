#include "ssid/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace ssid {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::string dims(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

// One-sided Jacobi on the columns of m (rows >= cols). Works on the transpose
// so every column is a contiguous row.
SvdResult svd_tall(const Matrix& m) {
    const std::size_t nr = m.rows(), nc = m.cols();
    Matrix bt = m.transpose(); // row j = column j of m
    Matrix vt = Matrix::identity(nc);

    const double conv_tol = 1e-15;
    const int max_sweeps = 60;
    // Columns whose mass is below machine noise relative to the whole matrix
    // are frozen; rotating them against each other only churns rounding
    // residue and never converges.
    const double fnorm = m.frobenius_norm();
    const double negligible = kEps * fnorm * kEps * fnorm;
    bool converged = false;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        converged = true;
        for (std::size_t p = 0; p + 1 < nc; ++p) {
            for (std::size_t q = p + 1; q < nc; ++q) {
                double* bp = bt.data() + p * nr;
                double* bq = bt.data() + q * nr;
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t k = 0; k < nr; ++k) {
                    alpha += bp[k] * bp[k];
                    beta += bq[k] * bq[k];
                    gamma += bp[k] * bq[k];
                }
                if (alpha <= negligible || beta <= negligible) continue;
                if (std::abs(gamma) <= conv_tol * std::sqrt(alpha * beta)) continue;
                converged = false;

                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t k = 0; k < nr; ++k) {
                    const double xp = bp[k], xq = bq[k];
                    bp[k] = c * xp - s * xq;
                    bq[k] = s * xp + c * xq;
                }
                double* vp = vt.data() + p * nc;
                double* vq = vt.data() + q * nc;
                for (std::size_t k = 0; k < nc; ++k) {
                    const double xp = vp[k], xq = vq[k];
                    vp[k] = c * xp - s * xq;
                    vq[k] = s * xp + c * xq;
                }
            }
        }
    }
    if (!converged)
        throw NumericalError("svd: Jacobi sweeps did not converge for " + dims(m) + " matrix");

    std::vector<double> sig(nc);
    for (std::size_t j = 0; j < nc; ++j) sig[j] = norm2(bt.row(j));

    std::vector<std::size_t> order(nc);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return sig[a] > sig[b]; });

    SvdResult out;
    out.sigma.resize(nc);
    out.u = Matrix(nr, nc);
    out.vt = Matrix(nc, nc);
    const double zero_tol = static_cast<double>(std::max(nr, nc)) * kEps *
                            (sig.empty() ? 0.0 : sig[order[0]]);
    std::size_t filled = nc;
    for (std::size_t j = 0; j < nc; ++j) {
        const std::size_t src = order[j];
        out.sigma[j] = sig[src];
        for (std::size_t k = 0; k < nc; ++k) out.vt(j, k) = vt(src, k);
        if (sig[src] > zero_tol && sig[src] > 0.0) {
            const double inv = 1.0 / sig[src];
            for (std::size_t k = 0; k < nr; ++k) out.u(k, j) = bt(src, k) * inv;
        } else if (j < filled) {
            filled = j;
        }
    }

    // Numerically null directions: complete U to orthonormal columns.
    for (std::size_t j = filled; j < nc; ++j) {
        std::vector<double> v(nr, 0.0);
        bool ok = false;
        for (std::size_t cand = 0; cand < nr && !ok; ++cand) {
            std::fill(v.begin(), v.end(), 0.0);
            v[cand] = 1.0;
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t c = 0; c < j; ++c) {
                    double proj = 0.0;
                    for (std::size_t k = 0; k < nr; ++k) proj += out.u(k, c) * v[k];
                    for (std::size_t k = 0; k < nr; ++k) v[k] -= proj * out.u(k, c);
                }
            }
            const double nrm = norm2(v);
            if (nrm > 0.5) {
                for (std::size_t k = 0; k < nr; ++k) out.u(k, j) = v[k] / nrm;
                ok = true;
            }
        }
        if (!ok)
            throw NumericalError("svd: failed to complete orthonormal basis for " + dims(m));
    }
    return out;
}

inline double sign_of(double a, double b) { return b >= 0.0 ? std::abs(a) : -std::abs(a); }

// Balance a square matrix by diagonal similarity scaling (EISPACK balanc).
void balance(Matrix& a) {
    const std::size_t n = a.rows();
    const double radix = 2.0, sq = radix * radix;
    bool done = false;
    while (!done) {
        done = true;
        for (std::size_t i = 0; i < n; ++i) {
            double r = 0.0, c = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(a(j, i));
                r += std::abs(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double g = r / radix, f = 1.0;
            const double s = c + r;
            while (c < g) {
                f *= radix;
                c *= sq;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= sq;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                const double ginv = 1.0 / f;
                for (std::size_t j = 0; j < n; ++j) a(i, j) *= ginv;
                for (std::size_t j = 0; j < n; ++j) a(j, i) *= f;
            }
        }
    }
}

// Reduce to upper Hessenberg form by stabilized elementary similarity
// transformations (EISPACK elmhes). Entries below the subdiagonal are zeroed.
void hessenberg(Matrix& a) {
    const std::size_t n = a.rows();
    if (n < 3) return;
    for (std::size_t m = 1; m + 1 < n; ++m) {
        double x = 0.0;
        std::size_t piv = m;
        for (std::size_t j = m; j < n; ++j) {
            if (std::abs(a(j, m - 1)) > std::abs(x)) {
                x = a(j, m - 1);
                piv = j;
            }
        }
        if (piv != m) {
            for (std::size_t j = m - 1; j < n; ++j) std::swap(a(piv, j), a(m, j));
            for (std::size_t j = 0; j < n; ++j) std::swap(a(j, piv), a(j, m));
        }
        if (x != 0.0) {
            for (std::size_t i = m + 1; i < n; ++i) {
                double y = a(i, m - 1);
                if (y == 0.0) continue;
                y /= x;
                a(i, m - 1) = y;
                for (std::size_t j = m; j < n; ++j) a(i, j) -= y * a(m, j);
                for (std::size_t j = 0; j < n; ++j) a(j, m) += y * a(j, i);
            }
        }
    }
    for (std::size_t i = 2; i < n; ++i)
        for (std::size_t j = 0; j + 1 < i; ++j) a(i, j) = 0.0;
}

// Francis double-shift QR on an upper Hessenberg matrix, eigenvalues only
// (EISPACK hqr). Destroys a.
std::vector<std::complex<double>> hqr(Matrix& a, long iter_cap) {
    const long n = static_cast<long>(a.rows());
    std::vector<std::complex<double>> eig(static_cast<std::size_t>(n));

    double anorm = 0.0;
    for (long i = 0; i < n; ++i)
        for (long j = std::max(i - 1, 0L); j < n; ++j) anorm += std::abs(a(i, j));

    long total_its = 0;
    double t = 0.0;
    long nn = n - 1;
    while (nn >= 0) {
        long its = 0;
        long l;
        do {
            for (l = nn; l >= 1; --l) {
                double s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
                if (s == 0.0) s = anorm;
                if (std::abs(a(l, l - 1)) <= kEps * s) {
                    a(l, l - 1) = 0.0;
                    break;
                }
            }
            double x = a(nn, nn);
            if (l == nn) {
                eig[nn--] = x + t;
            } else {
                double y = a(nn - 1, nn - 1);
                double w = a(nn, nn - 1) * a(nn - 1, nn);
                if (l == nn - 1) {
                    double p = 0.5 * (y - x);
                    double q = p * p + w;
                    double z = std::sqrt(std::abs(q));
                    x += t;
                    if (q >= 0.0) {
                        z = p + sign_of(z, p);
                        eig[nn - 1] = eig[nn] = x + z;
                        if (z != 0.0) eig[nn] = x - w / z;
                    } else {
                        eig[nn - 1] = {x + p, z};
                        eig[nn] = std::conj(eig[nn - 1]);
                    }
                    nn -= 2;
                } else {
                    if (its == 30 || ++total_its > iter_cap)
                        throw NumericalError("eigenvalues: QR iteration did not converge for " +
                                             dims(a) + " matrix");
                    if (its == 10 || its == 20) {
                        // exceptional shift
                        t += x;
                        for (long i = 0; i <= nn; ++i) a(i, i) -= x;
                        double s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
                        y = x = 0.75 * s;
                        w = -0.4375 * s * s;
                    }
                    ++its;
                    long m;
                    double p = 0.0, q = 0.0, r = 0.0, z = 0.0;
                    for (m = nn - 2; m >= l; --m) {
                        z = a(m, m);
                        double rr = x - z;
                        double ss = y - z;
                        p = (rr * ss - w) / a(m + 1, m) + a(m, m + 1);
                        q = a(m + 1, m + 1) - z - rr - ss;
                        r = a(m + 2, m + 1);
                        ss = std::abs(p) + std::abs(q) + std::abs(r);
                        p /= ss;
                        q /= ss;
                        r /= ss;
                        if (m == l) break;
                        const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
                        const double v = std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) +
                                                        std::abs(a(m + 1, m + 1)));
                        if (u <= kEps * v) break;
                    }
                    for (long i = m + 2; i <= nn; ++i) {
                        a(i, i - 2) = 0.0;
                        if (i != m + 2) a(i, i - 3) = 0.0;
                    }
                    for (long k = m; k <= nn - 1; ++k) {
                        if (k != m) {
                            p = a(k, k - 1);
                            q = a(k + 1, k - 1);
                            r = (k != nn - 1) ? a(k + 2, k - 1) : 0.0;
                            x = std::abs(p) + std::abs(q) + std::abs(r);
                            if (x != 0.0) {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        const double s = sign_of(std::sqrt(p * p + q * q + r * r), p);
                        if (s == 0.0) continue;
                        if (k == m) {
                            if (l != m) a(k, k - 1) = -a(k, k - 1);
                        } else {
                            a(k, k - 1) = -s * x;
                        }
                        p += s;
                        x = p / s;
                        double yy = q / s;
                        z = r / s;
                        q /= p;
                        r /= p;
                        for (long j = k; j <= nn; ++j) {
                            double pp = a(k, j) + q * a(k + 1, j);
                            if (k != nn - 1) {
                                pp += r * a(k + 2, j);
                                a(k + 2, j) -= pp * z;
                            }
                            a(k + 1, j) -= pp * yy;
                            a(k, j) -= pp * x;
                        }
                        const long mmin = nn < k + 3 ? nn : k + 3;
                        for (long i = l; i <= mmin; ++i) {
                            double pp = x * a(i, k) + yy * a(i, k + 1);
                            if (k != nn - 1) {
                                pp += z * a(i, k + 2);
                                a(i, k + 2) -= pp * r;
                            }
                            a(i, k + 1) -= pp * q;
                            a(i, k) -= pp;
                        }
                    }
                }
            }
        } while (l < nn - 1);
    }
    return eig;
}

} // namespace

double Spectrum::max_real() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& ev : eigenvalues) m = std::max(m, ev.real());
    return m;
}

SvdResult svd(const Matrix& m) {
    if (m.rows() == 0 || m.cols() == 0) throw DimensionError("svd: empty matrix");
    require_finite(m, "svd");
    if (m.rows() >= m.cols()) return svd_tall(m);
    SvdResult f = svd_tall(m.transpose());
    return {f.vt.transpose(), std::move(f.sigma), f.u.transpose()};
}

Spectrum eigenvalues(const Matrix& m) {
    if (m.rows() != m.cols())
        throw DimensionError("eigenvalues: matrix must be square, got " + dims(m));
    if (m.rows() == 0) throw DimensionError("eigenvalues: empty matrix");
    require_finite(m, "eigenvalues");
    const std::size_t n = m.rows();
    if (n == 1) return {{std::complex<double>(m(0, 0), 0.0)}};
    Matrix work = m;
    balance(work);
    hessenberg(work);
    return {hqr(work, 100 * static_cast<long>(n))};
}

Matrix pseudo_inverse(const Matrix& m, double rcond) {
    require_finite(m, "pseudo_inverse");
    if (rcond < 0.0) rcond = 1e-12 * static_cast<double>(std::max(m.rows(), m.cols()));
    const SvdResult f = svd(m);
    const double cutoff = rcond * (f.sigma.empty() ? 0.0 : f.sigma[0]);
    Matrix p(m.cols(), m.rows());
    for (std::size_t j = 0; j < f.sigma.size(); ++j) {
        if (f.sigma[j] <= cutoff || f.sigma[j] == 0.0) continue;
        const double inv = 1.0 / f.sigma[j];
        for (std::size_t i = 0; i < m.cols(); ++i) {
            const double vij = f.vt(j, i) * inv;
            if (vij == 0.0) continue;
            for (std::size_t k = 0; k < m.rows(); ++k) p(i, k) += vij * f.u(k, j);
        }
    }
    return p;
}

double determinant(const Matrix& m) {
    if (m.rows() != m.cols()) throw DimensionError("determinant: matrix must be square");
    const std::size_t n = m.rows();
    Matrix lu = m;
    double det = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(lu(i, k)) > std::abs(lu(piv, k))) piv = i;
        if (lu(piv, k) == 0.0) return 0.0;
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu(piv, j), lu(k, j));
            det = -det;
        }
        det *= lu(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = lu(i, k) / lu(k, k);
            for (std::size_t j = k; j < n; ++j) lu(i, j) -= f * lu(k, j);
        }
    }
    return det;
}

double spectral_norm(const Matrix& m) {
    const SvdResult f = svd(m);
    return f.sigma.empty() ? 0.0 : f.sigma[0];
}

} // namespace ssid
