#pragma once

#include "itecal/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace itecal {

// One trial participant. `delta` is the predicted absolute risk reduction,
// `pi` the predicted control-arm (baseline) risk when the model provides one.
struct SubjectRecord {
    int arm = 0;
    int outcome = 0;
    double delta = 0.0;
    std::optional<double> pi;
    std::optional<double> order_key;

    bool operator==(const SubjectRecord&) const = default;
};

enum class Ordering { Delta, OrderKey };

inline const char* to_string(Ordering o) noexcept {
    return o == Ordering::Delta ? "delta" : "order_key";
}

namespace detail {

inline void require_record(const SubjectRecord& r, std::size_t index) {
    auto fail = [&](const char* field, const std::string& what) {
        throw Error(ErrorCode::FieldOutOfRange, "domain",
                    std::string(field) + " " + what + " at record " + std::to_string(index), field, index);
    };
    if (r.arm != 0 && r.arm != 1) fail("arm", "must be 0 or 1");
    if (r.outcome != 0 && r.outcome != 1) fail("outcome", "must be 0 or 1");
    if (!std::isfinite(r.delta) || r.delta < -1.0 || r.delta > 1.0) fail("delta", "must lie in [-1,1]");
    if (r.pi) {
        const double p = *r.pi;
        if (!std::isfinite(p) || p < 0.0 || p > 1.0) fail("pi", "must lie in [0,1]");
        const double treated = p - r.delta;
        if (treated < 0.0 || treated > 1.0) fail("pi", "minus delta must lie in [0,1]");
    }
    if (r.order_key && !std::isfinite(*r.order_key)) fail("order_key", "must be finite");
}

}  // namespace detail

// A validated sample sorted ascending by the active ordering key. Only
// build_sample() creates one, so every instance satisfies the invariants.
class OrderedSample {
public:
    std::span<const SubjectRecord> records() const noexcept { return records_; }
    const SubjectRecord& operator[](std::size_t i) const { return records_[i]; }
    std::size_t size() const noexcept { return records_.size(); }
    Ordering ordering() const noexcept { return ordering_; }
    bool tie_flag() const noexcept { return tie_flag_; }
    // Position of each sorted record in the caller's original input.
    std::span<const std::size_t> input_index() const noexcept { return input_index_; }

    double key(std::size_t i) const {
        return ordering_ == Ordering::Delta ? records_[i].delta : *records_[i].order_key;
    }

    bool has_baseline_risk() const noexcept {
        return std::all_of(records_.begin(), records_.end(), [](const SubjectRecord& r) { return r.pi.has_value(); });
    }

    std::size_t arm_count(int arm) const noexcept {
        return static_cast<std::size_t>(
            std::count_if(records_.begin(), records_.end(), [arm](const SubjectRecord& r) { return r.arm == arm; }));
    }

    bool operator==(const OrderedSample&) const = default;

private:
    friend OrderedSample build_sample(std::span<const SubjectRecord>, Ordering);

    std::vector<SubjectRecord> records_;
    std::vector<std::size_t> input_index_;
    Ordering ordering_ = Ordering::Delta;
    bool tie_flag_ = false;
};

// Validates every record and sorts stably by the chosen key; ties keep their
// input order.
inline OrderedSample build_sample(std::span<const SubjectRecord> records, Ordering ordering = Ordering::Delta) {
    if (records.empty()) throw Error(ErrorCode::EmptySample, "domain", "no records supplied");

    bool has_control = false;
    bool has_treated = false;
    for (std::size_t i = 0; i < records.size(); ++i) {
        detail::require_record(records[i], i);
        if (ordering == Ordering::OrderKey && !records[i].order_key) {
            throw Error(ErrorCode::MissingOrderKey, "domain", "record " + std::to_string(i) + " has no ordering key",
                        "order_key", i);
        }
        (records[i].arm == 1 ? has_treated : has_control) = true;
    }
    if (!has_control || !has_treated) {
        throw Error(ErrorCode::SingleArmSample, "domain",
                    has_control ? "no treated subjects" : "no control subjects");
    }

    auto key_of = [&](std::size_t i) {
        return ordering == Ordering::Delta ? records[i].delta : *records[i].order_key;
    };

    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return key_of(l) < key_of(r); });

    OrderedSample out;
    out.ordering_ = ordering;
    out.records_.reserve(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        out.records_.push_back(records[order[i]]);
        if (i > 0 && key_of(order[i]) == key_of(order[i - 1])) out.tie_flag_ = true;
    }
    out.input_index_ = std::move(order);
    return out;
}

inline OrderedSample build_sample(const std::vector<SubjectRecord>& records, Ordering ordering = Ordering::Delta) {
    return build_sample(std::span<const SubjectRecord>(records), ordering);
}

enum class ProcessKind { Risk, IteConditional, IteMarginal };

inline const char* to_string(ProcessKind k) noexcept {
    switch (k) {
        case ProcessKind::Risk: return "risk";
        case ProcessKind::IteConditional: return "ite-conditional";
        case ProcessKind::IteMarginal: return "ite-marginal";
    }
    return "unknown";
}

// A realized standardized process: vertices (t_k, S_k) for k = 0..n with the
// origin included, the unstandardized scaled errors C_k, and the ordering-key
// value at each index (index 0 repeats the first key).
struct ProcessPath {
    ProcessKind kind = ProcessKind::Risk;
    std::vector<double> times;
    std::vector<double> locations;
    std::vector<double> raw_errors;
    std::vector<double> keys;
    // Total standard deviation s_n, so that S_k * s_n / n == C_k.
    double total_sd = 0.0;

    std::size_t n() const noexcept { return times.empty() ? 0 : times.size() - 1; }
    double terminal_location() const { return locations.back(); }
    double terminal_error() const { return raw_errors.back(); }
};

// Bridge-part fields are empty when only the BM test was run; p_unified is
// empty in bridge-only mode.
struct TestReport {
    double c_n = 0.0;
    double s_n = 0.0;
    double bm_stat = 0.0;
    double p_bm = 1.0;
    std::optional<double> p_mean;
    std::optional<double> bridge_stat;
    std::optional<double> p_bridge;
    std::optional<double> p_unified;
};

}  // namespace itecal
