#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace lunareg {

/// Wall-clock seconds per registration stage.
struct StageTimes {
    double preprocess = 0.0;
    double detect = 0.0;  ///< detection + description
    double match = 0.0;
    double estimate = 0.0;
    double warp = 0.0;

    double sum() const { return preprocess + detect + match + estimate + warp; }
};

/// One benchmark cell. A cell is failed exactly when the RMSE fields are
/// absent; `error` carries the diagnostic for failed cells.
struct RegistrationReport {
    std::string algorithm;
    std::string dataset;
    std::optional<double> rmse_x;  ///< pixels; absent => failed
    std::optional<double> rmse_y;
    StageTimes stage_times;
    double total_time = 0.0;  ///< seconds; >= stage sum minus measurement slack
    int n_kp_a = 0;
    int n_kp_b = 0;
    int n_matches = 0;
    int n_inliers = 0;
    std::string error;

    bool ok() const { return rmse_x.has_value() && rmse_y.has_value(); }
    std::string status() const { return ok() ? "ok" : "failed"; }
};

/// Fixed-point with 4 decimals, trailing zeros (and a bare point) stripped:
/// 0.62489 -> "0.6249", 3.8090 -> "3.809", 5.0 -> "5".
std::string format_metric(double v);

std::string report_csv_header();
std::string report_csv_row(const RegistrationReport& r);

/// Header line plus one row per report, '\n'-terminated.
std::string reports_to_csv(const std::vector<RegistrationReport>& reports);

/// Flat object mirroring the CSV columns; NA fields become null.
nlohmann::json report_to_json(const RegistrationReport& r);
std::string reports_to_json_string(const std::vector<RegistrationReport>& reports);

/// Compact per-algorithm summary: algorithm,dataset,rmse_x,rmse_y,t_total.
std::string summary_row(const RegistrationReport& r);
std::string summary_table(const std::vector<RegistrationReport>& reports);

}  // namespace lunareg
