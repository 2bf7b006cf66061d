#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ppcon/errors.hpp"
#include "ppcon/keydist.hpp"
#include "ppcon/simnet.hpp"

namespace ppcon {

// Canonical float formatting for every CSV: 12 significant digits.
inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

// states.csv, buffers_channel_<k>.csv (one per channel) and
// channel_sums.csv under `dir`. Byte-stable for identical traces.
inline void export_trace(const Trace& trace, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string());

    {
        std::ostringstream out;
        out << "round,node,x\n";
        for (const RoundRecord& rec : trace.rounds)
            for (std::size_t i = 0; i < rec.states.size(); ++i)
                out << rec.round << "," << (i + 1) << "," << format_real(rec.states[i]) << "\n";
        write_file(dir / "states.csv", out.str());
    }

    const std::size_t n = trace.x0.size();
    for (std::size_t c = 0; c < trace.key.size(); ++c) {
        std::ostringstream out;
        out << "round";
        for (std::size_t i = 1; i <= n; ++i) out << ",node_" << i;
        out << "\n";
        for (const RoundRecord& rec : trace.rounds) {
            out << rec.round;
            for (std::size_t i = 0; i < n; ++i) out << "," << format_real(rec.buffers(i, c));
            out << "\n";
        }
        write_file(dir / ("buffers_channel_" + std::to_string(trace.key.elements()[c]) + ".csv"),
                   out.str());
    }

    {
        std::ostringstream out;
        out << "round,channel,sum,lyapunov\n";
        for (const RoundRecord& rec : trace.rounds)
            for (std::size_t c = 0; c < trace.key.size(); ++c)
                out << rec.round << "," << trace.key.elements()[c] << ","
                    << format_real(rec.channel_sums[c]) << "," << format_real(rec.lyapunov[c])
                    << "\n";
        write_file(dir / "channel_sums.csv", out.str());
    }
}

inline void export_adversary(const AdversaryView& view, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string());
    std::ostringstream out;
    out << "round,mode,target,verdict,free_dim\n";
    const char* mode =
        view.spec.mode == AdversarySpec::Mode::collusion ? "collusion" : "eavesdrop";
    for (const RoundVerdict& v : view.verdicts)
        out << v.round << "," << mode << "," << view.spec.target << ","
            << (v.determined ? "determined" : "underdetermined") << "," << v.free_dim << "\n";
    write_file(dir / "adversary.csv", out.str());
}

inline void export_keydist(const KeyDistResult& result, const std::filesystem::path& dir,
                           int rounds_per_block) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string());
    std::ostringstream out;
    out << "block,cumulative_rounds,max_deviation\n";
    for (std::size_t b = 0; b < result.block_deviations.size(); ++b)
        out << (b + 1) << "," << (b + 1) * static_cast<std::size_t>(rounds_per_block) << ","
            << format_real(result.block_deviations[b]) << "\n";
    write_file(dir / "keydist.csv", out.str());
}

} // namespace ppcon
