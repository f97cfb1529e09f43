#ifndef PKGTRIAGE_MATRIX_HPP
#define PKGTRIAGE_MATRIX_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace pkgtriage {

// Dense row-major matrix of doubles. Feature vectors here are mostly 0/1
// one-hot indicators, but models treat them as real numbers.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }
    std::span<double> row(std::size_t r) {
        return {data_.data() + r * cols_, cols_};
    }

    void push_row(std::span<const double> values) {
        if (rows_ == 0 && cols_ == 0) cols_ = values.size();
        data_.insert(data_.end(), values.begin(), values.end());
        ++rows_;
    }

    const std::vector<double>& data() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Binary labels aligned with matrix rows; 1 = malicious (the positive class).
using LabelVector = std::vector<int>;

} // namespace pkgtriage

#endif // PKGTRIAGE_MATRIX_HPP
