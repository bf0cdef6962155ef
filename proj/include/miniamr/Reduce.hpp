#pragma once

#include <limits>
#include <span>
#include <tuple>
#include <type_traits>
#include <vector>

#include "miniamr/ParallelFor.hpp"

namespace miniamr {

template <class... Ts>
struct TypeList {};

template <class T>
constexpr T lowest_value() {
    if constexpr (std::numeric_limits<T>::has_infinity) return -std::numeric_limits<T>::infinity();
    else return std::numeric_limits<T>::lowest();
}
template <class T>
constexpr T highest_value() {
    if constexpr (std::numeric_limits<T>::has_infinity) return std::numeric_limits<T>::infinity();
    else return std::numeric_limits<T>::max();
}

enum class ReduceOpKind : int { Sum = 0, Min = 1, Max = 2 };

struct ReduceOpSum {
    static constexpr ReduceOpKind kind = ReduceOpKind::Sum;
    template <class T> static constexpr T identity() { return T(0); }
    template <class T> static constexpr T combine(T a, T b) { return a + b; }
};
struct ReduceOpMin {
    static constexpr ReduceOpKind kind = ReduceOpKind::Min;
    template <class T> static constexpr T identity() { return highest_value<T>(); }
    template <class T> static constexpr T combine(T a, T b) { return b < a ? b : a; }
};
struct ReduceOpMax {
    static constexpr ReduceOpKind kind = ReduceOpKind::Max;
    template <class T> static constexpr T identity() { return lowest_value<T>(); }
    template <class T> static constexpr T combine(T a, T b) { return a < b ? b : a; }
};

namespace detail {

template <class Ops, class Tuple>
struct Reducer;

template <class... Ops, class... Ts>
struct Reducer<TypeList<Ops...>, std::tuple<Ts...>> {
    static_assert(sizeof...(Ops) == sizeof...(Ts), "one value per reduction op");
    using tuple_type = std::tuple<Ts...>;

    static tuple_type identity() { return tuple_type{Ops::template identity<Ts>()...}; }

    template <std::size_t... I>
    static void combine_impl(tuple_type& acc, const tuple_type& v, std::index_sequence<I...>) {
        ((std::get<I>(acc) = Ops::template combine<Ts>(std::get<I>(acc), std::get<I>(v))), ...);
    }
    static void combine(tuple_type& acc, const tuple_type& v) {
        combine_impl(acc, v, std::index_sequence_for<Ops...>{});
    }
};

template <class T>
struct as_tuple {
    using type = std::tuple<T>;
};
template <class... Ts>
struct as_tuple<std::tuple<Ts...>> {
    using type = std::tuple<std::decay_t<Ts>...>;
};

//! Reduces over [0, total) using `visit(begin, end, acc)` for contiguous ranges.
template <class R, class Visit>
typename R::tuple_type reduce_chunks(Backend& be, Long total, Visit&& visit) {
    const int nchunks = int(std::min<Long>(be.reduce_chunks(), std::max<Long>(total, 1)));
    std::vector<typename R::tuple_type> partial(nchunks, R::identity());
    be.launch(nchunks, [&](int c) {
        auto [b, e] = chunk_range(total, nchunks, c);
        auto acc = R::identity();
        visit(b, e, acc);
        partial[c] = acc;
    });
    auto result = R::identity();
    for (const auto& p : partial) R::combine(result, p);
    return result;
}

} // namespace detail

//! Single-launch mixed reduction over i in [0, n): f(i) returns one value per op.
template <class... Ops, class F>
auto parallel_reduce(Backend& be, TypeList<Ops...>, Long n, F&& f) {
    using V = typename detail::as_tuple<std::invoke_result_t<F&, Long>>::type;
    using R = detail::Reducer<TypeList<Ops...>, V>;
    return detail::reduce_chunks<R>(be, n, [&](Long b, Long e, V& acc) {
        for (Long i = b; i < e; ++i) R::combine(acc, V(f(i)));
    });
}

//! Single-launch mixed reduction over all cells of all boxes: f(b, i, j, k).
template <class... Ops, class F>
auto parallel_reduce(Backend& be, TypeList<Ops...>, std::span<const Box> boxes, F&& f) {
    using V = typename detail::as_tuple<std::invoke_result_t<F&, int, int, int, int>>::type;
    using R = detail::Reducer<TypeList<Ops...>, V>;
    detail::BoxIndexer ix(boxes);
    return detail::reduce_chunks<R>(be, ix.total(), [&](Long b, Long e, V& acc) {
        ix.for_each(b, e, [&](int bx, int i, int j, int k) { R::combine(acc, V(f(bx, i, j, k))); });
    });
}

//! Single-launch mixed reduction over one box: f(i, j, k).
template <class... Ops, class F>
auto parallel_reduce(Backend& be, TypeList<Ops...> ops, const Box& bx, F&& f) {
    return parallel_reduce(be, ops, std::span<const Box>(&bx, 1),
                           [&](int, int i, int j, int k) { return f(i, j, k); });
}

} // namespace miniamr
