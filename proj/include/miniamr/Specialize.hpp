#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>

#include "miniamr/ParallelFor.hpp"

namespace miniamr {

//! A finite set of integer cases for one runtime option.
template <int... Vs>
struct CompileTimeOptions {
    static constexpr std::size_t size = sizeof...(Vs);
    static constexpr std::array<int, sizeof...(Vs)> values{Vs...};

    static constexpr int position(int v) {
        for (std::size_t i = 0; i < size; ++i)
            if (values[i] == v) return int(i);
        return -1;
    }
};

template <class... Sets>
struct OptionTable {
    static constexpr std::size_t num_sets = sizeof...(Sets);
    static constexpr std::size_t variant_count = (std::size_t(1) * ... * Sets::size);
};

namespace detail {

template <class... Sets>
struct VariantDecode {
    static constexpr std::array<std::size_t, sizeof...(Sets)> sizes{Sets::size...};

    //! Mixed-radix digit of set s in variant index v (first set is least significant).
    static constexpr std::size_t digit(std::size_t v, std::size_t s) {
        for (std::size_t t = 0; t < s; ++t) v /= sizes[t];
        return v % sizes[s];
    }

    template <std::size_t V, std::size_t... S>
    static constexpr auto constants(std::index_sequence<S...>) {
        return std::tuple<std::integral_constant<int, Sets::values[digit(V, S)]>...>{};
    }
};

template <class F, class... Sets>
using VariantFn = void (*)(Backend&, Long, F&);

template <class F, std::size_t V, class... Sets>
void run_variant(Backend& be, Long n, F& f) {
    using Decode = VariantDecode<Sets...>;
    constexpr auto cs = Decode::template constants<V>(std::index_sequence_for<Sets...>{});
    parallel_for(be, n, [&](Long i) { std::apply([&](auto... c) { f(i, c...); }, cs); });
}

template <class F, class... Sets, std::size_t... V>
constexpr auto make_variant_table(std::index_sequence<V...>) {
    return std::array<VariantFn<F, Sets...>, sizeof...(V)>{&run_variant<F, V, Sets...>...};
}

} // namespace detail

//! The dense table of pre-instantiated variants for body type F, indexed by
//! mixed-radix case index (first option set least significant).
template <class F, class... Sets>
constexpr auto specialized_variants(OptionTable<Sets...>) {
    return detail::make_variant_table<F, Sets...>(std::make_index_sequence<OptionTable<Sets...>::variant_count>{});
}

//! Mixed-radix case index of the selected runtime values; throws if a value
//! is not a member of its option set.
template <class... Sets>
std::size_t variant_index(OptionTable<Sets...>, const std::array<int, sizeof...(Sets)>& selected) {
    constexpr std::array<std::size_t, sizeof...(Sets)> sizes{Sets::size...};
    std::array<int, sizeof...(Sets)> where{};
    std::size_t s = 0;
    ((where[s] = Sets::position(selected[s]), ++s), ...);
    std::size_t index = 0;
    std::size_t radix = 1;
    for (std::size_t t = 0; t < sizeof...(Sets); ++t) {
        if (where[t] < 0)
            throw std::invalid_argument("specialized launch: value " + std::to_string(selected[t]) +
                                        " is not a member of option set " + std::to_string(t));
        index += std::size_t(where[t]) * radix;
        radix *= sizes[t];
    }
    return index;
}

//! f(i, c0, c1, ...) for i in [0, n), where each c is a std::integral_constant
//! equal to the selected runtime value of its option set. Exactly one of the
//! pre-instantiated variants runs.
template <class... Sets, class F>
void parallel_for(Backend& be, OptionTable<Sets...> table, const std::array<int, sizeof...(Sets)>& selected, Long n,
                  F&& f) {
    using Body = std::remove_reference_t<F>;
    static constexpr auto variants = specialized_variants<Body>(table);
    const std::size_t v = variant_index(table, selected);
    variants[v](be, n, f);
}

} // namespace miniamr
