#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "vinedep/dependence.hpp"
#include "vinedep/dynamics.hpp"
#include "vinedep/gof.hpp"
#include "vinedep/rvine.hpp"

namespace vinedep {

struct NumericTable {
  std::vector<std::string> header;
  Matrix data;
};

/// Header row plus numeric cells. Missing or non-numeric cells raise
/// MalformedInput naming the line and column. An empty `columns` keeps all.
NumericTable read_numeric_csv(const std::string& path, const std::vector<std::string>& columns = {});

std::string format_number(double x, int digits = 10);
std::string csv_field(const std::string& s);
std::string matrix_csv(const std::vector<std::string>& header, const Matrix& data);

nlohmann::json spec_to_json(const CopulaSpec& spec);
CopulaSpec spec_from_json(const nlohmann::json& j);

/// Variable indices are written 1-based.
nlohmann::json vine_to_json(const FittedVine& vine);
/// Throws MalformedInput for structurally or numerically invalid documents.
FittedVine vine_from_json(const nlohmann::json& j);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

/// Graphviz drawing of tree `level` (1-based).
std::string tree_dot(const FittedVine& vine, int level);
/// Header: Tree,Pair,Copula,tau,param1,param2,lambda_L,lambda_U,loglik
std::string report_csv(const FittedVine& vine);
std::string report_markdown(const FittedVine& vine);
std::string tau_matrix_csv(const TauMatrix& taus);

nlohmann::json white_to_json(const WhiteTestResult& r);

/// Long-format channel CSV (date, channel_id, video_id, daily_views,
/// subscribers, comments, uploaded); dates are ISO yyyy-mm-dd or day numbers.
std::vector<ChannelSeries> read_channel_csv(const std::string& path);
std::string channel_report_csv(const std::vector<ChannelReport>& rows);

}  // namespace vinedep
