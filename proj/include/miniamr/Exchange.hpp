#pragma once

#include <cstring>
#include <optional>
#include <tuple>
#include <type_traits>
#include <vector>

#include "miniamr/CommPlan.hpp"
#include "miniamr/MultiFab.hpp"

namespace miniamr {

enum class CopyOp { Copy, Add };

//! Runs a plan: one fused pack launch, at most one message per peer, one
//! fused launch for local copies and one fused unpack launch.
void execute_plan(const CommPlan& plan, MultiFab& dst, const MultiFab& src, int scomp, int dcomp, int ncomp,
                  CopyOp op = CopyOp::Copy, const IndexMapping* map = nullptr);

//! Fills ghost cells of mf from valid data of mf (including periodic images
//! when geom is periodic). Ghost cells nothing covers are left untouched.
void fill_boundary(MultiFab& mf, const std::optional<Geometry>& geom, int scomp, int ncomp);
inline void fill_boundary(MultiFab& mf, const std::optional<Geometry>& geom) { fill_boundary(mf, geom, 0, mf.ncomp()); }
inline void fill_boundary(MultiFab& mf) { fill_boundary(mf, mf.geometry(), 0, mf.ncomp()); }

//! The cached plan fill_boundary uses for mf.
std::shared_ptr<const CommPlan> fill_boundary_plan(const MultiFab& mf, const std::optional<Geometry>& geom);

//! dst(cell) = src(cell) for every cell of grow(dst valid, dst_ngrow) covered
//! by grow(src valid, src_ngrow) (through periodic images when geom given).
void parallel_copy(MultiFab& dst, const MultiFab& src, int scomp, int dcomp, int ncomp,
                   const IntVect& src_ngrow = IntVect(0), const IntVect& dst_ngrow = IntVect(0),
                   const std::optional<Geometry>& geom = std::nullopt, CopyOp op = CopyOp::Copy);
inline void parallel_copy(MultiFab& dst, const MultiFab& src) {
    parallel_copy(dst, src, 0, 0, dst.ncomp());
}

std::shared_ptr<const CommPlan> parallel_copy_plan(const MultiFab& dst, const MultiFab& src, const IntVect& src_ngrow,
                                                   const IntVect& dst_ngrow, const std::optional<Geometry>& geom);

//! dst(cell) = src(map(cell)) for every valid cell of dst (plus dst_ngrow).
//! Throws if a mapped cell falls outside the source BoxArray.
void index_mapped_copy(MultiFab& dst, const MultiFab& src, int scomp, int dcomp, int ncomp, const IndexMapping& map,
                       const IntVect& dst_ngrow = IntVect(0));

// ---------------------------------------------------------------------------

namespace detail {

template <class T>
constexpr std::uint8_t value_tag() {
    if constexpr (std::is_floating_point_v<T>) return std::uint8_t(0x10 | sizeof(T));
    else if constexpr (std::is_signed_v<T>) return std::uint8_t(0x20 | sizeof(T));
    else return std::uint8_t(0x30 | sizeof(T));
}

} // namespace detail

//! Combines each rank's local tuple across all ranks; every rank receives the
//! same result, combined in rank order. Throws on every rank if the op lists
//! or value types differ between ranks.
template <class... Ops, class... Ts>
std::tuple<Ts...> global_reduce(Communicator& comm, TypeList<Ops...> ops, const std::tuple<Ts...>& local) {
    static_assert(sizeof...(Ops) == sizeof...(Ts), "one value per reduction op");
    using R = detail::Reducer<TypeList<Ops...>, std::tuple<Ts...>>;
    (void)ops;
    constexpr std::size_t nops = sizeof...(Ops);
    std::vector<std::byte> msg;
    msg.push_back(std::byte(nops));
    (msg.push_back(std::byte(int(Ops::kind))), ...);
    (msg.push_back(std::byte(detail::value_tag<Ts>())), ...);
    const std::size_t header = msg.size();
    std::apply(
        [&](const auto&... v) {
            (
                [&] {
                    const auto* p = reinterpret_cast<const std::byte*>(&v);
                    msg.insert(msg.end(), p, p + sizeof(v));
                }(),
                ...);
        },
        local);
    auto all = comm.allgather(msg);
    for (const auto& m : all) {
        if (m.size() != msg.size() || !std::equal(m.begin(), m.begin() + header, msg.begin()))
            throw CommError("global_reduce: reduction op lists differ across ranks");
    }
    auto result = R::identity();
    for (const auto& m : all) {
        std::tuple<Ts...> v;
        std::size_t off = header;
        std::apply(
            [&](auto&... x) {
                ((std::memcpy(&x, m.data() + off, sizeof(x)), off += sizeof(x)), ...);
            },
            v);
        R::combine(result, v);
    }
    return result;
}

//! Op-signature-checked reduction where the op list is a runtime value.
std::vector<double> global_reduce(Communicator& comm, const std::vector<ReduceOpKind>& ops,
                                  const std::vector<double>& local);

} // namespace miniamr
