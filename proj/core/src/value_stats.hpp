#ifndef PKGTRIAGE_SRC_VALUE_STATS_HPP
#define PKGTRIAGE_SRC_VALUE_STATS_HPP

#include <algorithm>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace pkgtriage::detail {

// Per-distinct-value statistics for one feature over a node's rows. Keeps a
// sorted value list built by insertion while cardinality stays small (the
// usual case for one-hot and count data) and falls back to sort-and-group
// for genuinely continuous columns. Accumulation order is the node's row
// order in both paths, which keeps floating-point sums reproducible.
template <class Slot>
class ValueStats {
public:
    void clear() {
        values_.clear();
        slots_.clear();
    }

    std::size_t size() const { return values_.size(); }
    double value(std::size_t i) const { return values_[i]; }
    const Slot& slot(std::size_t i) const { return slots_[i]; }

    template <class ValueOf, class Accumulate>
    void build(std::span<const std::size_t> rows, ValueOf&& value_of,
               Accumulate&& accumulate) {
        clear();
        values_.reserve(kSmallCardinality);
        slots_.reserve(kSmallCardinality);
        for (std::size_t r : rows) {
            double v = value_of(r);
            auto it = std::lower_bound(values_.begin(), values_.end(), v);
            auto pos = static_cast<std::size_t>(it - values_.begin());
            if (it != values_.end() && *it == v) {
                accumulate(slots_[pos], r);
            } else if (values_.size() < kSmallCardinality) {
                values_.insert(it, v);
                slots_.insert(slots_.begin() + static_cast<std::ptrdiff_t>(pos), Slot{});
                accumulate(slots_[pos], r);
            } else {
                build_by_sorting(rows, value_of, accumulate);
                return;
            }
        }
    }

private:
    static constexpr std::size_t kSmallCardinality = 64;

    template <class ValueOf, class Accumulate>
    void build_by_sorting(std::span<const std::size_t> rows, ValueOf&& value_of,
                          Accumulate&& accumulate) {
        clear();
        std::vector<std::pair<double, std::size_t>> order;
        order.reserve(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            order.emplace_back(value_of(rows[i]), i);
        std::stable_sort(order.begin(), order.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [v, i] : order) {
            if (values_.empty() || values_.back() != v) {
                values_.push_back(v);
                slots_.push_back(Slot{});
            }
            accumulate(slots_.back(), rows[i]);
        }
    }

    std::vector<double> values_;
    std::vector<Slot> slots_;
};

struct ClassCounts {
    long benign = 0;
    long malicious = 0;
};

struct GradientSums {
    long count = 0;
    double sum_residual = 0.0;
};

} // namespace pkgtriage::detail

#endif // PKGTRIAGE_SRC_VALUE_STATS_HPP
