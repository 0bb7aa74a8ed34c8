#include "mpccert/report.hpp"

#include "mpccert/io.hpp"

#include <sstream>

namespace mpccert {

namespace {

/// Quotes a CSV field when it contains a separator, quote or newline.
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

const char* provenance(const ReportRow& r) { return r.sampled ? "sampled" : "exact"; }

std::string join_path(const std::string& dir, const std::string& file) {
    return dir.empty() ? file : dir + "/" + file;
}

}  // namespace

std::string report_csv(const CertificationReport& r) {
    std::ostringstream os;
    os << kReportHeader << '\n';
    for (const auto& row : r.rows)
        os << csv_field(row.param) << ',' << row.method_label() << ',' << row.terminal << ','
           << format_double(row.alpha) << ',' << format_double(row.n_min) << ',' << provenance(row) << '\n';
    return os.str();
}

std::string detail_csv(const CertificationReport& r) {
    std::ostringstream os;
    os << kDetailHeader << '\n';
    for (const auto& row : r.rows)
        os << csv_field(row.param) << ',' << format_double(row.q) << ',' << format_double(row.r) << ',' << row.N
           << ',' << row.sigma << ',' << row.method_label() << ',' << row.terminal << ',' << format_double(row.alpha)
           << ',' << format_double(row.n_min) << ',' << provenance(row) << ',' << format_double(row.gamma_bar) << ','
           << format_double(row.eps_o) << ',' << format_double(row.eps_f) << ',' << format_double(row.c_f_lower)
           << ',' << format_double(row.c_f_upper) << ',' << format_double(row.gamma_f_bar) << ','
           << (!row.applicable ? "n/a" : row.ok ? "ok" : "error") << ',' << csv_field(row.note) << '\n';
    return os.str();
}

int emit_reports(const CertificationReport& r, const std::string& dir, const std::string& prefix) {
    write_file_atomic(join_path(dir, prefix + ".csv"), report_csv(r));
    write_file_atomic(join_path(dir, prefix + "_details.csv"), detail_csv(r));
    write_file_atomic(join_path(dir, prefix + ".json"), r.metadata.dump(2) + "\n");
    write_file_atomic(join_path(dir, prefix + "_timings.json"), r.timings.dump(2) + "\n");
    return r.failed() ? 1 : 0;
}

void emit_simulation(const SimulationSummary& s, const std::string& dir, const std::string& prefix) {
    write_trace_csv(join_path(dir, prefix + "_trace.csv"), s.trace);
    write_file_atomic(join_path(dir, prefix + "_trace.json"), s.meta.dump(2) + "\n");
}

}  // namespace mpccert
