#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cimdet/errors.hpp"
#include "cimdet/mimo.hpp"

namespace cimdet {

// Channel trace container: a sequence of complex channel matrices plus the
// header describing them. On disk: one JSON header line
//   {"nt":..,"nr":..,"count":..,"source":".."}
// followed by count records of 2*nt*nr little-endian float64 values in
// row-major (Re, Im interleaved) order.
struct ChannelTrace {
    int nt = 0;
    int nr = 0;
    std::string source;
    std::vector<CMatrix> matrices;

    std::size_t count() const { return matrices.size(); }
};

inline void write_trace(const std::string& path, const ChannelTrace& trace) {
    for (const CMatrix& m : trace.matrices)
        if (m.rows != trace.nr || m.cols != trace.nt)
            throw TraceError("write_trace: matrix does not match header dimensions");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw TraceError("write_trace: cannot open " + path);
    nlohmann::json header = {
        {"nt", trace.nt}, {"nr", trace.nr}, {"count", trace.matrices.size()}, {"source", trace.source}};
    out << header.dump() << '\n';
    std::vector<double> buf;
    for (const CMatrix& m : trace.matrices) {
        buf.clear();
        for (const cplx& v : m.a) {
            buf.push_back(v.real());
            buf.push_back(v.imag());
        }
        out.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size() * sizeof(double)));
    }
    if (!out) throw TraceError("write_trace: write failed for " + path);
}

inline ChannelTrace read_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TraceError("read_trace: cannot open " + path);
    std::string header_line;
    if (!std::getline(in, header_line)) throw TraceError("read_trace: missing header line");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_line);
    } catch (const nlohmann::json::exception& e) {
        throw TraceError(std::string("read_trace: malformed header: ") + e.what());
    }
    if (!header.contains("nt") || !header.contains("nr") || !header.contains("count"))
        throw TraceError("read_trace: header missing nt/nr/count");

    ChannelTrace trace;
    std::int64_t count = 0;
    try {
        trace.nt = header.at("nt").get<int>();
        trace.nr = header.at("nr").get<int>();
        trace.source = header.value("source", std::string{});
        count = header.at("count").get<std::int64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw TraceError(std::string("read_trace: bad header field: ") + e.what());
    }
    if (trace.nt <= 0 || trace.nr <= 0 || count < 0)
        throw TraceError("read_trace: non-positive header dimensions");

    const std::size_t record_doubles = 2 * static_cast<std::size_t>(trace.nt) * trace.nr;
    std::vector<double> buf(record_doubles);
    trace.matrices.reserve(static_cast<std::size_t>(count));
    for (std::int64_t k = 0; k < count; ++k) {
        in.read(reinterpret_cast<char*>(buf.data()),
                static_cast<std::streamsize>(record_doubles * sizeof(double)));
        if (static_cast<std::size_t>(in.gcount()) != record_doubles * sizeof(double))
            throw TraceError("read_trace: truncated payload in " + path);
        CMatrix m(trace.nr, trace.nt);
        for (std::size_t i = 0; i < m.a.size(); ++i) m.a[i] = cplx(buf[2 * i], buf[2 * i + 1]);
        trace.matrices.push_back(std::move(m));
    }
    return trace;
}

}  // namespace cimdet
