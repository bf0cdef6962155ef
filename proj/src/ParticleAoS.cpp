#include "miniamr/ParticleAoS.hpp"

namespace miniamr {

AoSRefTile soa_to_aos_ref(const ParticleTile& t) {
    AoSRefTile a;
    const Long n = t.size();
    a.records.resize(std::size_t(n));
    for (Long i = 0; i < n; ++i) {
        for (int d = 0; d < SpaceDim; ++d) a.records[i].pos[d] = t.pos(d)[i];
        a.records[i].idcpu = t.idcpu()[i];
    }
    for (int c = 0; c < t.num_real(); ++c) a.reals.emplace_back(t.real(c), t.real(c) + n);
    for (int c = 0; c < t.num_int(); ++c) a.ints.emplace_back(t.int_data(c), t.int_data(c) + n);
    return a;
}

ParticleTile aos_ref_to_soa(const AoSRefTile& a, Arena* arena) {
    ParticleTile t(int(a.reals.size()), int(a.ints.size()), arena);
    const Long n = a.size();
    t.resize(n);
    for (Long i = 0; i < n; ++i) {
        for (int d = 0; d < SpaceDim; ++d) t.pos(d)[i] = a.records[i].pos[d];
        t.idcpu()[i] = a.records[i].idcpu;
    }
    for (int c = 0; c < t.num_real(); ++c) std::copy(a.reals[c].begin(), a.reals[c].end(), t.real(c));
    for (int c = 0; c < t.num_int(); ++c) std::copy(a.ints[c].begin(), a.ints[c].end(), t.int_data(c));
    return t;
}

} // namespace miniamr
