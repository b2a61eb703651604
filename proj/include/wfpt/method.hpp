#pragma once

// The thirteen approximation methods: a timescale/truncation rule paired with
// a small-time summation style. The large-time method has no style; every
// other timescale pairs with S14 or S17.

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "wfpt/sum_kernels.hpp"

namespace wfpt {

enum class MethodTimescale {
    Large,        // fixed-k large-time
    SmallNav,     // fixed-k small-time, two-sided bound
    SmallGon,     // fixed-k small-time, paired-terms bound
    SmallSwse,    // adaptive small-time
    CombinedNav,  // min(k_large, k_small_nav)
    CombinedGon,  // min(k_large, k_small_gon)
    CombinedSwse, // k_large <= delta ? large : adaptive small
};

struct MethodSpec {
    MethodTimescale timescale = MethodTimescale::CombinedSwse;
    std::optional<SumStyle> style = SumStyle::S17; // nullopt iff Large

    bool valid() const {
        return (timescale == MethodTimescale::Large) == !style.has_value();
    }

    friend bool operator==(const MethodSpec&, const MethodSpec&) = default;
};

inline MethodSpec default_method() {
    return {MethodTimescale::CombinedSwse, SumStyle::S17};
}

// All 13 valid methods, in CLI listing order.
inline const std::array<MethodSpec, 13>& all_methods() {
    using T = MethodTimescale;
    static const std::array<MethodSpec, 13> methods = {{
        {T::Large, std::nullopt},
        {T::SmallNav, SumStyle::S14},
        {T::SmallNav, SumStyle::S17},
        {T::SmallGon, SumStyle::S14},
        {T::SmallGon, SumStyle::S17},
        {T::SmallSwse, SumStyle::S14},
        {T::SmallSwse, SumStyle::S17},
        {T::CombinedNav, SumStyle::S14},
        {T::CombinedNav, SumStyle::S17},
        {T::CombinedGon, SumStyle::S14},
        {T::CombinedGon, SumStyle::S17},
        {T::CombinedSwse, SumStyle::S14},
        {T::CombinedSwse, SumStyle::S17},
    }};
    return methods;
}

// Method naming scheme: {large|small|combined}-{nav|gon|swse}-{14|17}, with
// the styleless "large-nav".
inline std::string method_name(const MethodSpec& m) {
    std::string s;
    switch (m.timescale) {
    case MethodTimescale::Large: return "large-nav";
    case MethodTimescale::SmallNav: s = "small-nav"; break;
    case MethodTimescale::SmallGon: s = "small-gon"; break;
    case MethodTimescale::SmallSwse: s = "small-swse"; break;
    case MethodTimescale::CombinedNav: s = "combined-nav"; break;
    case MethodTimescale::CombinedGon: s = "combined-gon"; break;
    case MethodTimescale::CombinedSwse: s = "combined-swse"; break;
    }
    s += (m.style == SumStyle::S14) ? "-14" : "-17";
    return s;
}

inline std::optional<MethodSpec> parse_method(std::string_view name) {
    for (const MethodSpec& m : all_methods())
        if (method_name(m) == name) return m;
    return std::nullopt;
}

} // namespace wfpt
