#include "Plotfile.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace miniamr::tools {

namespace {

constexpr std::string_view kMagic = "MINIAMR-PLT v1";

void put_u64(std::string& out, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) out.push_back(char((v >> (8 * b)) & 0xff));
}

std::uint64_t get_u64(const char* p) {
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= std::uint64_t(static_cast<unsigned char>(p[b])) << (8 * b);
    return v;
}

std::string format_time(double t) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", t);
    return buf;
}

Long box_cells(const Box& b) { return b.num_pts(); }

class HeaderReader {
  public:
    explicit HeaderReader(std::string_view s) : s_(s) {}

    std::string line() {
        const auto nl = s_.find('\n', pos_);
        if (nl == std::string_view::npos) throw PlotfileError("plotfile: truncated header");
        std::string out(s_.substr(pos_, nl - pos_));
        pos_ = nl + 1;
        return out;
    }
    std::size_t pos() const noexcept { return pos_; }

  private:
    std::string_view s_;
    std::size_t pos_ = 0;
};

template <class... T>
void scan(const std::string& line, const char* what, T&... out) {
    std::istringstream in(line);
    ((in >> out), ...);
    std::string extra;
    if (!in || (in >> extra)) throw PlotfileError(std::string("plotfile: malformed ") + what + " line `" + line + "`");
}

} // namespace

std::string encode_plotfile(const Plotfile& pf) {
    if (pf.ndim != SpaceDim) throw PlotfileError("plotfile: ndim differs from this build");
    for (const auto& n : pf.names)
        if (n.empty() || n.find_first_of(" \t\n") != std::string::npos)
            throw PlotfileError("plotfile: component name '" + n + "' is empty or has whitespace");
    std::string out(kMagic);
    out += '\n';
    out += std::to_string(pf.ndim) + ' ' + std::to_string(pf.names.size()) + ' ' + std::to_string(pf.levels.size()) +
           ' ' + format_time(pf.time) + '\n';
    for (std::size_t n = 0; n < pf.names.size(); ++n) out += (n ? " " : "") + pf.names[n];
    out += '\n';
    for (const auto& lev : pf.levels) {
        out += std::to_string(lev.boxes.size()) + ' ' + std::to_string(lev.ref_ratio) + '\n';
        for (const Box& b : lev.boxes) {
            for (int d = 0; d < SpaceDim; ++d) out += std::to_string(b.lo(d)) + ' ';
            for (int d = 0; d < SpaceDim; ++d) out += std::to_string(b.hi(d)) + (d + 1 < SpaceDim ? " " : "");
            out += '\n';
        }
    }
    for (const auto& lev : pf.levels) {
        if (lev.data.size() != lev.boxes.size()) throw PlotfileError("plotfile: level payload count differs from box count");
        for (std::size_t b = 0; b < lev.boxes.size(); ++b) {
            const auto& d = lev.data[b];
            if (Long(d.size()) != box_cells(lev.boxes[b]) * Long(pf.names.size()))
                throw PlotfileError("plotfile: payload size mismatch for box " + lev.boxes[b].str());
            put_u64(out, d.size() * sizeof(double));
            for (double v : d) put_u64(out, std::bit_cast<std::uint64_t>(v));
        }
    }
    return out;
}

Plotfile decode_plotfile(std::string_view bytes) {
    HeaderReader h(bytes);
    if (h.line() != kMagic) throw PlotfileError("plotfile: bad magic");
    Plotfile pf;
    std::size_t ncomp = 0, nlevels = 0;
    scan(h.line(), "size", pf.ndim, ncomp, nlevels, pf.time);
    if (pf.ndim != SpaceDim)
        throw PlotfileError("plotfile: written with ndim " + std::to_string(pf.ndim) + ", this build has " +
                            std::to_string(SpaceDim));
    {
        std::istringstream in(h.line());
        for (std::string n; in >> n;) pf.names.push_back(n);
        if (pf.names.size() != ncomp) throw PlotfileError("plotfile: name count differs from ncomp");
    }
    for (std::size_t l = 0; l < nlevels; ++l) {
        PlotLevel lev;
        std::size_t nboxes = 0;
        scan(h.line(), "level", nboxes, lev.ref_ratio);
        for (std::size_t b = 0; b < nboxes; ++b) {
            std::istringstream in(h.line());
            IntVect lo, hi;
            for (int d = 0; d < SpaceDim; ++d) in >> lo[d];
            for (int d = 0; d < SpaceDim; ++d) in >> hi[d];
            std::string extra;
            if (!in || (in >> extra)) throw PlotfileError("plotfile: malformed box line");
            lev.boxes.emplace_back(lo, hi);
        }
        pf.levels.push_back(std::move(lev));
    }
    std::size_t pos = h.pos();
    for (auto& lev : pf.levels) {
        for (const Box& b : lev.boxes) {
            if (bytes.size() - pos < 8) throw PlotfileError("plotfile: truncated payload");
            const std::uint64_t n = get_u64(bytes.data() + pos);
            pos += 8;
            const std::uint64_t expect = std::uint64_t(box_cells(b)) * ncomp * sizeof(double);
            if (n != expect) throw PlotfileError("plotfile: payload of box " + b.str() + " has the wrong length");
            if (bytes.size() - pos < n) throw PlotfileError("plotfile: truncated payload");
            std::vector<double> d(n / sizeof(double));
            for (auto& v : d) {
                v = std::bit_cast<double>(get_u64(bytes.data() + pos));
                pos += 8;
            }
            lev.data.push_back(std::move(d));
        }
    }
    if (pos != bytes.size()) throw PlotfileError("plotfile: trailing bytes after the payload");
    return pf;
}

void write_plotfile(const std::string& path, const Plotfile& pf) {
    const std::string bytes = encode_plotfile(pf);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw PlotfileError("plotfile: cannot open '" + path + "' for writing");
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out) throw PlotfileError("plotfile: write to '" + path + "' failed");
}

Plotfile read_plotfile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PlotfileError("plotfile: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return decode_plotfile(ss.str());
}

Plotfile gather_plotfile(const std::vector<const MultiFab*>& levels, const std::vector<int>& ref_ratios,
                         const std::vector<std::string>& names, double time) {
    if (levels.size() != ref_ratios.size()) throw PlotfileError("plotfile: one ref ratio per level required");
    Plotfile pf;
    pf.time = time;
    pf.names = names;
    if (levels.empty()) return pf;
    const int ncomp = levels[0]->ncomp();
    for (const auto* mf : levels)
        if (mf->ncomp() != ncomp || std::size_t(ncomp) != names.size())
            throw PlotfileError("plotfile: need one name per component on every level");

    Communicator& comm = levels[0]->comm();
    const int me = comm.rank();
    auto pack_fab = [&](const MultiFab& mf, int li) {
        const Box& b = mf.validbox(li);
        auto a = mf.const_array(li);
        std::vector<double> d;
        d.reserve(std::size_t(b.num_pts() * ncomp));
        for (int n = 0; n < ncomp; ++n)
            for (Long o = 0; o < b.num_pts(); ++o) {
                const auto c = b.at_offset(o).dim3();
                d.push_back(double(a(c[0], c[1], c[2], n)));
            }
        return d;
    };

    for (std::size_t l = 0; l < levels.size(); ++l) {
        PlotLevel lev;
        lev.ref_ratio = ref_ratios[l];
        lev.boxes = levels[l]->box_array().boxes();
        lev.data.resize(lev.boxes.size());
        pf.levels.push_back(std::move(lev));
    }

    if (me != 0) {
        std::vector<double> flat;
        for (const auto* mf : levels)
            for (int li = 0; li < mf->local_size(); ++li) {
                const auto d = pack_fab(*mf, li);
                flat.insert(flat.end(), d.begin(), d.end());
            }
        bool owns = false;
        for (const auto* mf : levels) owns = owns || mf->local_size() > 0;
        if (owns) {
            ArenaBuffer buf(flat.size() * sizeof(double), The_Comm_Arena());
            std::memcpy(buf.data(), flat.data(), buf.size());
            comm.send(0, std::move(buf));
        }
        return pf;
    }

    for (std::size_t l = 0; l < levels.size(); ++l)
        for (int li = 0; li < levels[l]->local_size(); ++li)
            pf.levels[l].data[levels[l]->global_index(li)] = pack_fab(*levels[l], li);
    for (int r = 1; r < comm.nranks(); ++r) {
        bool owns = false;
        for (const auto* mf : levels)
            for (std::size_t b = 0; b < mf->box_array().size(); ++b) owns = owns || mf->distribution_map()[b] == r;
        if (!owns) continue;
        ArenaBuffer buf = comm.recv(r);
        const auto* p = reinterpret_cast<const double*>(buf.data());
        std::size_t at = 0;
        for (std::size_t l = 0; l < levels.size(); ++l) {
            const auto& ba = levels[l]->box_array();
            for (std::size_t b = 0; b < ba.size(); ++b) {
                if (levels[l]->distribution_map()[b] != r) continue;
                const std::size_t n = std::size_t(ba[b].num_pts() * ncomp);
                if ((at + n) * sizeof(double) > buf.size()) throw PlotfileError("plotfile: short gather message");
                pf.levels[l].data[b].assign(p + at, p + at + n);
                at += n;
            }
        }
    }
    return pf;
}

void write_plotfile(const std::string& path, const std::vector<const MultiFab*>& levels,
                    const std::vector<int>& ref_ratios, const std::vector<std::string>& names, double time) {
    Plotfile pf = gather_plotfile(levels, ref_ratios, names, time);
    if (levels.empty() || levels[0]->comm().rank() == 0) write_plotfile(path, pf);
}

} // namespace miniamr::tools
