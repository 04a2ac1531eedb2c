#include "lunareg/eval/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace lunareg {

namespace {

/// CSV-quotes a field only when it contains a delimiter, quote, or newline.
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string metric_or_na(const std::optional<double>& v) {
    return v ? format_metric(*v) : "NA";
}

double round4(double v) { return std::round(v * 10000.0) / 10000.0; }

nlohmann::json json_metric(const std::optional<double>& v) {
    if (!v)
        return nullptr;
    return round4(*v);
}

}  // namespace

std::string format_metric(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    std::string s(buf);
    while (!s.empty() && s.back() == '0')
        s.pop_back();
    if (!s.empty() && s.back() == '.')
        s.pop_back();
    if (s == "-0")
        s = "0";
    return s;
}

std::string report_csv_header() {
    return "algorithm,dataset,rmse_x,rmse_y,t_preprocess,t_detect,t_match,"
           "t_estimate,t_warp,t_total,n_kp_a,n_kp_b,n_matches,n_inliers,status";
}

std::string report_csv_row(const RegistrationReport& r) {
    std::ostringstream out;
    out << csv_field(r.algorithm) << ',' << csv_field(r.dataset) << ','
        << metric_or_na(r.rmse_x) << ',' << metric_or_na(r.rmse_y) << ','
        << format_metric(r.stage_times.preprocess) << ','
        << format_metric(r.stage_times.detect) << ','
        << format_metric(r.stage_times.match) << ','
        << format_metric(r.stage_times.estimate) << ','
        << format_metric(r.stage_times.warp) << ',' << format_metric(r.total_time)
        << ',' << r.n_kp_a << ',' << r.n_kp_b << ',' << r.n_matches << ','
        << r.n_inliers << ',' << r.status();
    return out.str();
}

std::string reports_to_csv(const std::vector<RegistrationReport>& reports) {
    std::string out = report_csv_header() + "\n";
    for (const RegistrationReport& r : reports)
        out += report_csv_row(r) + "\n";
    return out;
}

nlohmann::json report_to_json(const RegistrationReport& r) {
    nlohmann::json j;
    j["algorithm"] = r.algorithm;
    j["dataset"] = r.dataset;
    j["rmse_x"] = json_metric(r.rmse_x);
    j["rmse_y"] = json_metric(r.rmse_y);
    j["t_preprocess"] = round4(r.stage_times.preprocess);
    j["t_detect"] = round4(r.stage_times.detect);
    j["t_match"] = round4(r.stage_times.match);
    j["t_estimate"] = round4(r.stage_times.estimate);
    j["t_warp"] = round4(r.stage_times.warp);
    j["t_total"] = round4(r.total_time);
    j["n_kp_a"] = r.n_kp_a;
    j["n_kp_b"] = r.n_kp_b;
    j["n_matches"] = r.n_matches;
    j["n_inliers"] = r.n_inliers;
    j["status"] = r.status();
    if (!r.error.empty())
        j["error"] = r.error;
    return j;
}

std::string reports_to_json_string(const std::vector<RegistrationReport>& reports) {
    nlohmann::json arr = nlohmann::json::array();
    for (const RegistrationReport& r : reports)
        arr.push_back(report_to_json(r));
    return arr.dump(2) + "\n";
}

std::string summary_row(const RegistrationReport& r) {
    return csv_field(r.algorithm) + "," + csv_field(r.dataset) + "," +
           metric_or_na(r.rmse_x) + "," + metric_or_na(r.rmse_y) + "," +
           format_metric(r.total_time);
}

std::string summary_table(const std::vector<RegistrationReport>& reports) {
    std::string out = "algorithm,dataset,rmse_x,rmse_y,t_total\n";
    for (const RegistrationReport& r : reports)
        out += summary_row(r) + "\n";
    return out;
}

}  // namespace lunareg
