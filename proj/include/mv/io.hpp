#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mv/system.hpp"
#include "mv/traversal.hpp"

namespace mv {

// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

namespace detail {

// Token stream over a text format; '#' starts a comment.
class TokenReader {
public:
    explicit TokenReader(std::istream& in) : in_(in) {}
    bool next(std::string& tok) {
        while (true) {
            if (pos_ >= line_.size()) {
                if (!std::getline(in_, line_)) return false;
                pos_ = 0;
                continue;
            }
            while (pos_ < line_.size() && std::isspace(static_cast<unsigned char>(line_[pos_])))
                ++pos_;
            if (pos_ >= line_.size() || line_[pos_] == '#') {
                pos_ = line_.size();
                continue;
            }
            size_t end = pos_;
            while (end < line_.size() && !std::isspace(static_cast<unsigned char>(line_[end])))
                ++end;
            tok = line_.substr(pos_, end - pos_);
            pos_ = end;
            return true;
        }
    }
    std::string expect(const char* what) {
        std::string tok;
        if (!next(tok)) throw InputError(std::string("unexpected end of input, wanted ") + what);
        return tok;
    }
    long long expect_int(const char* what) {
        const std::string tok = expect(what);
        char* end = nullptr;
        const long long v = std::strtoll(tok.c_str(), &end, 10);
        if (end == tok.c_str() || *end != '\0')
            throw InputError(std::string("expected integer for ") + what + ", got '" + tok + "'");
        return v;
    }
    double expect_real(const char* what) {
        const std::string tok = expect(what);
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0')
            throw InputError(std::string("expected real for ") + what + ", got '" + tok + "'");
        return v;
    }
    void expect_keyword(const char* kw) {
        const std::string tok = expect(kw);
        if (tok != kw) throw InputError(std::string("expected '") + kw + "', got '" + tok + "'");
    }

private:
    std::istream& in_;
    std::string line_;
    size_t pos_ = 0;
};

} // namespace detail

// MVSYS 1: `n <n>` / `s <s>` / `m <m_1..m_s>` / s blocks of
// `support <i> <#points>` followed by point rows.
inline SupportSystem read_system(std::istream& in) {
    detail::TokenReader tr(in);
    tr.expect_keyword("MVSYS");
    if (tr.expect_int("format version") != 1) throw InputError("unsupported MVSYS version");
    SupportSystem sys;
    tr.expect_keyword("n");
    sys.n = static_cast<int>(tr.expect_int("n"));
    tr.expect_keyword("s");
    sys.s = static_cast<int>(tr.expect_int("s"));
    if (sys.n <= 0 || sys.s <= 0) throw InputError("n and s must be positive");
    tr.expect_keyword("m");
    sys.multiplicities.resize(sys.s);
    for (int i = 0; i < sys.s; ++i)
        sys.multiplicities[i] = static_cast<int>(tr.expect_int("multiplicity"));
    sys.supports.resize(sys.s);
    for (int i = 0; i < sys.s; ++i) {
        tr.expect_keyword("support");
        const int idx = static_cast<int>(tr.expect_int("support index"));
        if (idx != i + 1) throw InputError("support blocks must appear in order");
        const int count = static_cast<int>(tr.expect_int("point count"));
        if (count <= 0) throw InputError("support must contain points");
        sys.supports[i].resize(count, Point(sys.n));
        for (int k = 0; k < count; ++k)
            for (int j = 0; j < sys.n; ++j)
                sys.supports[i][k][j] = tr.expect_int("coordinate");
    }
    sys.rebuild_offsets();
    validate_system(sys);
    return sys;
}

inline void write_system(std::ostream& out, const SupportSystem& sys) {
    out << "MVSYS 1\n";
    out << "n " << sys.n << "\n";
    out << "s " << sys.s << "\n";
    out << "m";
    for (int m : sys.multiplicities) out << ' ' << m;
    out << "\n";
    for (int i = 0; i < sys.s; ++i) {
        out << "support " << (i + 1) << ' ' << sys.supports[i].size() << "\n";
        for (const auto& p : sys.supports[i]) {
            for (int j = 0; j < sys.n; ++j) out << (j ? " " : "") << p[j];
            out << "\n";
        }
    }
}

// Lifting file: one `label value` pair per line; every label must appear.
inline Lifting read_lifting(std::istream& in, int total_points) {
    detail::TokenReader tr(in);
    Lifting lift;
    lift.values.assign(total_points, 0.0);
    std::vector<bool> seen(total_points, false);
    std::string tok;
    while (tr.next(tok)) {
        char* end = nullptr;
        const long long label = std::strtoll(tok.c_str(), &end, 10);
        if (end == tok.c_str() || *end != '\0')
            throw InputError("expected label in lifting file, got '" + tok + "'");
        if (label < 0 || label >= total_points)
            throw InputError("lifting label " + std::to_string(label) + " out of range");
        lift.values[label] = tr.expect_real("lifting value");
        seen[label] = true;
    }
    for (int i = 0; i < total_points; ++i)
        if (!seen[i]) throw InputError("lifting file misses label " + std::to_string(i));
    return lift;
}

inline void write_lifting(std::ostream& out, const Lifting& lift) {
    for (size_t i = 0; i < lift.values.size(); ++i)
        out << i << ' ' << format_double(lift.values[i]) << "\n";
}

// MVCELLS 1 payload.
struct CellsFile {
    uint64_t seed = 0;
    int n = 0, s = 0;
    int64_t index = 1;
    int64_t scaled_mixed_volume = 0;
    std::vector<MixedCell> cells;
};

inline void write_cells(std::ostream& out, const CellsFile& file,
                        const SupportSystem& label_space) {
    out << "MVCELLS 1\n";
    out << "seed " << file.seed << "\n";
    out << "n " << file.n << " s " << file.s << "\n";
    out << "index " << file.index << "\n";
    out << "scaled_mixed_volume " << file.scaled_mixed_volume << "\n";
    out << "cells " << file.cells.size() << "\n";
    for (const auto& cell : file.cells) {
        out << "cell " << cell.volume;
        for (int b = 0; b < file.s; ++b) {
            out << " ;";
            const int off = label_space.label_offset[b];
            const int end = label_space.label_offset[b + 1];
            for (uint32_t L : cell.labels)
                if (static_cast<int>(L) >= off && static_cast<int>(L) < end) out << ' ' << L;
        }
        out << " ; xi0";
        for (double v : cell.xi0) out << ' ' << format_double(v);
        out << " ; lambda0";
        for (double v : cell.lambda0) out << ' ' << format_double(v);
        out << "\n";
    }
}

inline CellsFile read_cells(std::istream& in) {
    detail::TokenReader tr(in);
    tr.expect_keyword("MVCELLS");
    if (tr.expect_int("format version") != 1) throw InputError("unsupported MVCELLS version");
    CellsFile file;
    tr.expect_keyword("seed");
    file.seed = static_cast<uint64_t>(tr.expect_int("seed"));
    tr.expect_keyword("n");
    file.n = static_cast<int>(tr.expect_int("n"));
    tr.expect_keyword("s");
    file.s = static_cast<int>(tr.expect_int("s"));
    tr.expect_keyword("index");
    file.index = tr.expect_int("index");
    tr.expect_keyword("scaled_mixed_volume");
    file.scaled_mixed_volume = tr.expect_int("scaled_mixed_volume");
    tr.expect_keyword("cells");
    const long long count = tr.expect_int("cell count");
    file.cells.reserve(count);
    for (long long c = 0; c < count; ++c) {
        tr.expect_keyword("cell");
        MixedCell cell;
        cell.volume = tr.expect_int("cell volume");
        std::string tok = tr.expect("';'");
        if (tok != ";") throw InputError("expected ';' after cell volume");
        for (int b = 0; b < file.s; ++b) {
            // labels of one block, terminated by the next ';'
            while (true) {
                tok = tr.expect("label or ';'");
                if (tok == ";") break;
                char* end = nullptr;
                const long long L = std::strtoll(tok.c_str(), &end, 10);
                if (end == tok.c_str() || *end != '\0')
                    throw InputError("expected label, got '" + tok + "'");
                cell.labels.push_back(static_cast<uint32_t>(L));
            }
        }
        tr.expect_keyword("xi0");
        for (int j = 0; j < file.n; ++j) cell.xi0.push_back(tr.expect_real("xi0 entry"));
        tok = tr.expect("';'");
        if (tok != ";") throw InputError("expected ';' before lambda0");
        tr.expect_keyword("lambda0");
        for (int i = 0; i < file.s; ++i) cell.lambda0.push_back(tr.expect_real("lambda0 entry"));
        std::sort(cell.labels.begin(), cell.labels.end());
        file.cells.push_back(std::move(cell));
    }
    return file;
}

} // namespace mv
