#include "qcav/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qcav {

bool solve_linear(double* a, double* b, int n) {
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(a[r * n + col]) > std::fabs(a[pivot * n + col])) pivot = r;
        if (std::fabs(a[pivot * n + col]) < 1e-300) return false;
        if (pivot != col) {
            for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
            std::swap(b[col], b[pivot]);
        }
        const double inv = 1.0 / a[col * n + col];
        for (int r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] * inv;
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            b[r] -= f * b[col];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= a[r * n + c] * b[c];
        b[r] = s / a[r * n + r];
    }
    return true;
}

bool invert_matrix(double* a, int n) {
    std::vector<double> work(static_cast<std::size_t>(n) * 2 * n, 0.0);
    const int w = 2 * n;
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) work[r * w + c] = a[r * n + c];
        work[r * w + n + r] = 1.0;
    }
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(work[r * w + col]) > std::fabs(work[pivot * w + col])) pivot = r;
        if (std::fabs(work[pivot * w + col]) < 1e-300) return false;
        if (pivot != col)
            for (int c = 0; c < w; ++c) std::swap(work[col * w + c], work[pivot * w + c]);
        const double inv = 1.0 / work[col * w + col];
        for (int c = 0; c < w; ++c) work[col * w + c] *= inv;
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = work[r * w + col];
            if (f == 0.0) continue;
            for (int c = 0; c < w; ++c) work[r * w + c] -= f * work[col * w + c];
        }
    }
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) a[r * n + c] = work[r * w + n + c];
    return true;
}

bool cholesky(double* a, int n) {
    for (int j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (int k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (!(d > 0.0)) return false;
        const double l = std::sqrt(d);
        a[j * n + j] = l;
        const double inv = 1.0 / l;
        for (int i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (int k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s * inv;
        }
    }
    return true;
}

bool invert_spd(double* a, int n) {
    if (!cholesky(a, n)) return false;
    // Invert the lower-triangular factor.
    for (int j = 0; j < n; ++j) {
        a[j * n + j] = 1.0 / a[j * n + j];
        for (int i = j + 1; i < n; ++i) {
            double s = 0.0;
            for (int k = j; k < i; ++k) s -= a[i * n + k] * a[k * n + j];
            a[i * n + j] = s / a[i * n + i];
        }
    }
    // A^-1 = L^-T L^-1, filled symmetrically.
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = 0.0;
            for (int k = i; k < n; ++k) s += a[k * n + i] * a[k * n + j];
            a[j * n + i] = s;
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j) a[i * n + j] = a[j * n + i];
    return true;
}

std::vector<double> jacobi_eigenvalues(std::vector<double> a, int n) {
    if (static_cast<int>(a.size()) != n * n)
        throw std::invalid_argument("jacobi_eigenvalues: size mismatch");
    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
        double diag = 0.0;
        for (int p = 0; p < n; ++p) diag += a[p * n + p] * a[p * n + p];
        if (off <= 1e-26 * std::max(diag, 1e-300)) break;

        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) continue;
                const double app = a[p * n + p];
                const double aqq = a[q * n + q];
                const double theta = 0.5 * (aqq - app) / apq;
                const double t = (theta >= 0.0 ? 1.0 : -1.0)
                               / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a[k * n + p];
                    const double akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a[p * n + k];
                    const double aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = a[i * n + i];
    std::sort(ev.begin(), ev.end());
    return ev;
}

}
