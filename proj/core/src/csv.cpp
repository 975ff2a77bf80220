#include "mfbn/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include "mfbn/errors.hpp"

namespace mfbn {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_raw_csv(const ErrorStats& stats, std::ostream& out) {
    out << "net_index,clamp,scheme,ln_z_exact,g_hat,err,iterations,status\n";
    for (const RawRow& r : stats.raw) {
        out << r.net_index << ',' << csv_field(r.clamp) << ',' << to_string(r.scheme) << ','
            << format_double(r.ln_z_exact) << ',' << format_double(r.g_hat) << ',' << format_double(r.err)
            << ',' << r.iterations << ',' << csv_field(r.status) << '\n';
    }
}

void write_summary_csv(const ErrorStats& stats, std::ostream& out) {
    out << "scheme,clamp,mean_err,n,unconverged\n";
    for (const SchemeStats& s : stats.per_scheme) {
        out << to_string(s.scheme) << ',' << csv_field(s.clamp) << ',' << format_double(s.mean_err) << ','
            << s.count << ',' << s.unconverged << '\n';
    }
}

void write_histogram_csv(const Histogram& h, std::ostream& out) {
    out << "bin_lo,bin_hi,count\n";
    const std::size_t bins = h.counts.size();
    for (std::size_t b = 0; b < bins; ++b) {
        const double lo = h.lo + (h.hi - h.lo) * static_cast<double>(b) / static_cast<double>(bins);
        const double hi = b + 1 == bins ? h.hi
                                        : h.lo + (h.hi - h.lo) * static_cast<double>(b + 1) / static_cast<double>(bins);
        out << format_double(lo) << ',' << format_double(hi) << ',' << h.counts[b] << '\n';
    }
}

void write_history_csv(const TrainHistory& history, std::ostream& out) {
    out << "epoch,mean_true_loglik,mean_objective,unconverged\n";
    for (const EvalRecord& r : history.records) {
        out << r.epoch << ',' << format_double(r.mean_true_loglik) << ',' << format_double(r.mean_objective) << ','
            << r.unconverged << '\n';
    }
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

}  // namespace

void write_experiment_outputs(const ErrorStats& stats, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        auto out = open_out(dir / "raw.csv");
        write_raw_csv(stats, out);
    }
    {
        auto out = open_out(dir / "summary.csv");
        write_summary_csv(stats, out);
    }
    std::set<std::string> clamps;
    for (const SchemeStats& s : stats.per_scheme) clamps.insert(s.clamp);
    for (const SchemeStats& s : stats.per_scheme) {
        std::string name = "hist_" + std::string(to_string(s.scheme));
        if (clamps.size() > 1) name += "_" + s.clamp;
        auto out = open_out(dir / (name + ".csv"));
        write_histogram_csv(s.histogram, out);
    }
}

}  // namespace mfbn
