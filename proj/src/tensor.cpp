#include "opsel/tensor.hpp"

#include <algorithm>
#include <stdexcept>

namespace opsel {

namespace {

void check(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

void prepare(Matrix& out, int rows, int cols, bool accumulate) {
    if (accumulate) {
        check(out.rows() == rows && out.cols() == cols, "accumulate target has wrong shape");
    } else {
        out = Matrix(rows, cols);
    }
}

}  // namespace

void matmul(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate) {
    check(a.cols() == b.rows(), "matmul: inner dimensions differ");
    prepare(out, a.rows(), b.cols(), accumulate);
    const int n = b.cols();
    for (int i = 0; i < a.rows(); ++i) {
        double* oi = out.row(i);
        const double* ai = a.row(i);
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = ai[k];
            if (aik == 0.0) continue;
            const double* bk = b.row(k);
            for (int j = 0; j < n; ++j) oi[j] += aik * bk[j];
        }
    }
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate) {
    check(a.rows() == b.rows(), "matmul_tn: row counts differ");
    prepare(out, a.cols(), b.cols(), accumulate);
    const int n = b.cols();
    for (int k = 0; k < a.rows(); ++k) {
        const double* ak = a.row(k);
        const double* bk = b.row(k);
        for (int i = 0; i < a.cols(); ++i) {
            const double aki = ak[i];
            if (aki == 0.0) continue;
            double* oi = out.row(i);
            for (int j = 0; j < n; ++j) oi[j] += aki * bk[j];
        }
    }
}

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate) {
    check(a.cols() == b.cols(), "matmul_nt: column counts differ");
    prepare(out, a.rows(), b.rows(), accumulate);
    for (int i = 0; i < a.rows(); ++i) {
        const double* ai = a.row(i);
        double* oi = out.row(i);
        for (int j = 0; j < b.rows(); ++j) {
            const double* bj = b.row(j);
            double s = 0.0;
            for (int k = 0; k < a.cols(); ++k) s += ai[k] * bj[k];
            oi[j] += s;
        }
    }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix out;
    matmul(a, b, out);
    return out;
}

void axpy(double alpha, const Matrix& x, Matrix& y) {
    check(x.rows() == y.rows() && x.cols() == y.cols(), "axpy: shapes differ");
    double* yd = y.data();
    const double* xd = x.data();
    for (std::size_t i = 0; i < x.size(); ++i) yd[i] += alpha * xd[i];
}

}  // namespace opsel
