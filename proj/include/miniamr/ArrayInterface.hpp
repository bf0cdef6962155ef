#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "miniamr/Fab.hpp"

namespace miniamr {

//! Host array-protocol metadata (version 3) describing native storage
//! without copying it. Strides are in bytes.
struct ArrayInterface {
    std::vector<Long> shape;
    std::vector<Long> strides;
    std::string typestr;
    std::uintptr_t data = 0;
    bool readonly = false;
    int version = 3;
};

template <class T>
std::string array_typestr() {
    using U = std::remove_cv_t<T>;
    const char kind = std::is_floating_point_v<U> ? 'f' : std::is_signed_v<U> ? 'i' : 'u';
    return std::string("<") + kind + std::to_string(sizeof(U));
}

//! Four axes over a fab view. 'F': (x, y, z, comp) with column-major strides.
//! 'C': (comp, z, y, x) over the same bytes. Unused axes have extent 1.
template <class T>
ArrayInterface array_interface(const FabView<T>& v, char order = 'F') {
    if (order != 'F' && order != 'C') throw std::invalid_argument(std::string("array_interface: unknown order '") + order + "'");
    const Long e = sizeof(T);
    ArrayInterface ai;
    ai.shape = {Long(v.hi[0] - v.lo[0] + 1), Long(v.hi[1] - v.lo[1] + 1), Long(v.hi[2] - v.lo[2] + 1), Long(v.ncomp)};
    ai.strides = {e, e * v.jstride, e * v.kstride, e * v.nstride};
    if (order == 'C') {
        std::swap(ai.shape[0], ai.shape[3]);
        std::swap(ai.shape[1], ai.shape[2]);
        std::swap(ai.strides[0], ai.strides[3]);
        std::swap(ai.strides[1], ai.strides[2]);
    }
    ai.typestr = array_typestr<T>();
    ai.data = reinterpret_cast<std::uintptr_t>(v.p);
    ai.readonly = std::is_const_v<T>;
    return ai;
}

//! One axis over a contiguous column, e.g. a particle attribute.
template <class T>
ArrayInterface array_interface(T* column, Long n) {
    ArrayInterface ai;
    ai.shape = {n};
    ai.strides = {Long(sizeof(T))};
    ai.typestr = array_typestr<T>();
    ai.data = reinterpret_cast<std::uintptr_t>(column);
    ai.readonly = std::is_const_v<T>;
    return ai;
}

//! Byte offset of a multi-index under the metadata.
inline Long byte_offset(const ArrayInterface& ai, const std::vector<Long>& idx) {
    if (idx.size() != ai.shape.size()) throw std::out_of_range("byte_offset: rank mismatch");
    Long off = 0;
    for (std::size_t a = 0; a < idx.size(); ++a) {
        if (idx[a] < 0 || idx[a] >= ai.shape[a]) throw std::out_of_range("byte_offset: index outside the shape");
        off += idx[a] * ai.strides[a];
    }
    return off;
}

//! Independent copy of a fab view, laid out contiguously in the given order.
template <class T>
std::vector<std::remove_cv_t<T>> to_host_array(const FabView<T>& v, char order = 'F') {
    const auto ai = array_interface(v, order);
    std::vector<std::remove_cv_t<T>> out;
    out.reserve(std::size_t(ai.shape[0] * ai.shape[1] * ai.shape[2] * ai.shape[3]));
    const auto* base = reinterpret_cast<const std::byte*>(ai.data);
    // Contiguous in the requested order: the first axis varies fastest for F, the last for C.
    if (order == 'F') {
        for (Long d = 0; d < ai.shape[3]; ++d)
            for (Long c = 0; c < ai.shape[2]; ++c)
                for (Long b = 0; b < ai.shape[1]; ++b)
                    for (Long a = 0; a < ai.shape[0]; ++a)
                        out.push_back(*reinterpret_cast<const T*>(base + a * ai.strides[0] + b * ai.strides[1] +
                                                                   c * ai.strides[2] + d * ai.strides[3]));
    } else {
        for (Long a = 0; a < ai.shape[0]; ++a)
            for (Long b = 0; b < ai.shape[1]; ++b)
                for (Long c = 0; c < ai.shape[2]; ++c)
                    for (Long d = 0; d < ai.shape[3]; ++d)
                        out.push_back(*reinterpret_cast<const T*>(base + a * ai.strides[0] + b * ai.strides[1] +
                                                                   c * ai.strides[2] + d * ai.strides[3]));
    }
    return out;
}

} // namespace miniamr
