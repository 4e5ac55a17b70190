#ifndef OPSEL_TENSOR_HPP
#define OPSEL_TENSOR_HPP

#include <cstddef>
#include <vector>

namespace opsel {

// Dense row-major matrix of doubles. Small on purpose: exactly the
// operations the networks need, nothing more.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(c)]; }
    double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(c)]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double* row(int r) { return data_.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_); }
    const double* row(int r) const { return data_.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_); }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool operator==(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_; }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// out = a * b (and the transposed variants). `accumulate` adds into out
// instead of overwriting; out must already have the right shape then.
void matmul(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate = false);
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate = false);  // a^T * b
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate = false);  // a * b^T

Matrix matmul(const Matrix& a, const Matrix& b);

void axpy(double alpha, const Matrix& x, Matrix& y);  // y += alpha * x

}  // namespace opsel

#endif
