#include "vinedep/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace vinedep {

using nlohmann::json;

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  for (auto& s : out) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  }
  return out;
}

std::vector<std::vector<std::string>> read_csv_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MalformedInput, "cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      rows.emplace_back();
      continue;
    }
    rows.push_back(split_csv_line(line));
  }
  while (!rows.empty() && rows.back().empty()) rows.pop_back();
  if (rows.empty() || rows.front().empty()) throw Error(ErrorCode::MalformedInput, path + " is empty");
  return rows;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

std::string cell_context(std::size_t line, const std::string& column) {
  return "line " + std::to_string(line) + ", column '" + column + "'";
}

}  // namespace

NumericTable read_numeric_csv(const std::string& path, const std::vector<std::string>& columns) {
  const auto rows = read_csv_rows(path);
  const auto& header = rows.front();
  std::vector<std::size_t> keep;
  if (columns.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) keep.push_back(j);
  } else {
    for (const auto& name : columns) {
      const auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) throw Error(ErrorCode::MalformedInput, "column '" + name + "' not found in " + path);
      keep.push_back(static_cast<std::size_t>(it - header.begin()));
    }
  }
  NumericTable t;
  for (std::size_t j : keep) t.header.push_back(header[j]);
  t.data.resize(static_cast<Eigen::Index>(rows.size() - 1), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size())
      throw Error(ErrorCode::MalformedInput, "line " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                                                 " fields, expected " + std::to_string(header.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
      double x = 0.0;
      if (!parse_double(row[keep[k]], x))
        throw Error(ErrorCode::MalformedInput,
                    "missing or non-numeric value '" + row[keep[k]] + "' at " + cell_context(r + 1, header[keep[k]]));
      t.data(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(k)) = x;
    }
  }
  return t;
}

std::string format_number(double x, int digits) {
  if (std::isnan(x)) return "";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string matrix_csv(const std::vector<std::string>& header, const Matrix& data) {
  std::ostringstream os;
  for (std::size_t j = 0; j < header.size(); ++j) os << (j ? "," : "") << csv_field(header[j]);
  os << "\n";
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) os << (j ? "," : "") << format_number(data(i, j), 17);
    os << "\n";
  }
  return os.str();
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MalformedInput, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::MalformedInput, "cannot write " + path);
  out << text;
}

// ---------------------------------------------------------------- model JSON

json spec_to_json(const CopulaSpec& spec) {
  return json{{"family", std::string(family_name(spec.family))},
              {"rotation", static_cast<int>(spec.rotation)},
              {"params", spec.params}};
}

CopulaSpec spec_from_json(const json& j) {
  try {
    CopulaSpec s;
    s.family = family_from_name(j.at("family").get<std::string>());
    s.rotation = rotation_from_degrees(j.value("rotation", 0));
    s.params = j.value("params", std::vector<double>{});
    validate(s);
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedInput, std::string("copula entry: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::MalformedInput, std::string("copula entry: ") + e.what());
  }
}

json vine_to_json(const FittedVine& vine) {
  json trees = json::array();
  for (std::size_t t = 0; t < vine.structure.trees.size(); ++t) {
    json edges = json::array();
    const auto& tree = vine.structure.trees[t];
    for (std::size_t k = 0; k < tree.edges.size(); ++k) {
      const VineEdge& e = tree.edges[k];
      const EdgeFit& f = vine.edge_fits[t][k];
      std::vector<int> cond;
      for (int c : e.conditioning) cond.push_back(c + 1);
      edges.push_back(json{{"conditioned", {e.a + 1, e.b + 1}},
                           {"conditioning", cond},
                           {"label", short_label(e)},
                           {"copula", spec_to_json(f.spec)},
                           {"tau", vine.edge_taus[t][k]},
                           {"lambda_lower", vine.edge_tails[t][k].lambda_lower},
                           {"lambda_upper", vine.edge_tails[t][k].lambda_upper},
                           {"loglik", f.loglik},
                           {"aic", f.aic}});
    }
    trees.push_back(json{{"level", tree.level}, {"edges", edges}});
  }
  return json{{"d", vine.structure.d},
              {"names", vine.names},
              {"trees", trees},
              {"total_loglik", vine.total_loglik},
              {"n_obs", vine.n_obs},
              {"notes", {{"indices", "1-based"}, {"tawn_type", 1}}}};
}

FittedVine vine_from_json(const json& j) {
  try {
    RVineStructure s;
    s.d = j.at("d").get<int>();
    if (s.d < 2) throw Error(ErrorCode::MalformedInput, "model dimension must be at least 2");
    EdgeSpecs specs;
    std::vector<std::vector<double>> logliks;
    for (const auto& jt : j.at("trees")) {
      VineTree tree;
      tree.level = jt.at("level").get<int>();
      specs.emplace_back();
      logliks.emplace_back();
      for (const auto& je : jt.at("edges")) {
        const auto pair = je.at("conditioned").get<std::vector<int>>();
        if (pair.size() != 2) throw Error(ErrorCode::MalformedInput, "conditioned pair must have two entries");
        VineEdge e{pair[0] - 1, pair[1] - 1, {}, -1, -1};
        for (int c : je.value("conditioning", std::vector<int>{})) e.conditioning.push_back(c - 1);
        tree.edges.push_back(std::move(e));
        specs.back().push_back(spec_from_json(je.at("copula")));
        logliks.back().push_back(je.value("loglik", 0.0));
      }
      s.trees.push_back(std::move(tree));
    }
    FittedVine vine = make_vine(std::move(s), specs, j.value("names", std::vector<std::string>{}));
    if (static_cast<int>(vine.names.size()) != vine.dim())
      throw Error(ErrorCode::MalformedInput, "names must list one entry per variable");
    vine.total_loglik = 0.0;
    for (std::size_t t = 0; t < logliks.size(); ++t)
      for (std::size_t k = 0; k < logliks[t].size(); ++k) {
        EdgeFit& f = vine.edge_fits[t][k];
        f.loglik = logliks[t][k];
        f.aic = 2.0 * f.n_params - 2.0 * f.loglik;
        vine.total_loglik += f.loglik;
      }
    vine.n_obs = j.value("n_obs", std::size_t{0});
    return vine;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedInput, std::string("model: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MalformedInput) throw;
    throw Error(ErrorCode::MalformedInput, std::string("model: ") + e.what());
  }
}

// ---------------------------------------------------------------- reports

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string tree_dot(const FittedVine& vine, int level) {
  if (level < 1 || level > static_cast<int>(vine.structure.trees.size()))
    throw Error(ErrorCode::InputOutOfRange, "no tree at level " + std::to_string(level));
  const auto t = static_cast<std::size_t>(level - 1);
  const VineTree& tree = vine.structure.trees[t];
  std::ostringstream os;
  os << "graph tree_" << level << " {\n  label=\"Tree " << level << "\";\n  node [shape=ellipse];\n";
  if (t == 0) {
    for (int v = 0; v < vine.dim(); ++v)
      os << "  n" << v << " [label=\"" << dot_escape(vine.names[static_cast<std::size_t>(v)]) << "\"];\n";
  } else {
    const auto& prev = vine.structure.trees[t - 1].edges;
    for (std::size_t k = 0; k < prev.size(); ++k) os << "  n" << k << " [label=\"" << short_label(prev[k]) << "\"];\n";
  }
  for (std::size_t k = 0; k < tree.edges.size(); ++k) {
    const VineEdge& e = tree.edges[k];
    os << "  n" << e.left << " -- n" << e.right << " [label=\"" << short_label(e) << "\\n"
       << dot_escape(display_name(vine.edge_fits[t][k].spec)) << " tau=" << format_number(vine.edge_taus[t][k], 3)
       << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

std::string report_csv(const FittedVine& vine) {
  std::ostringstream os;
  os << "Tree,Pair,Copula,tau,param1,param2,lambda_L,lambda_U,loglik\n";
  for (std::size_t t = 0; t < vine.structure.trees.size(); ++t) {
    const auto& edges = vine.structure.trees[t].edges;
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const EdgeFit& f = vine.edge_fits[t][k];
      const auto& p = f.spec.params;
      os << t + 1 << "," << csv_field(edge_label(edges[k], vine.names)) << "," << csv_field(display_name(f.spec)) << ","
         << format_number(vine.edge_taus[t][k], 6) << "," << (p.size() > 0 ? format_number(p[0], 6) : "") << ","
         << (p.size() > 1 ? format_number(p[1], 6) : "") << ","
         << format_number(vine.edge_tails[t][k].lambda_lower, 6) << ","
         << format_number(vine.edge_tails[t][k].lambda_upper, 6) << "," << format_number(f.loglik, 8) << "\n";
    }
  }
  return os.str();
}

std::string report_markdown(const FittedVine& vine) {
  auto fixed = [](double x, int places) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", places, x);
    return std::string(buf);
  };
  std::ostringstream os;
  os << "| Tree | Dependence Pair | Copula | τ | Parameters | λ_L | λ_U |\n";
  os << "|---|---|---|---|---|---|---|\n";
  for (std::size_t t = 0; t < vine.structure.trees.size(); ++t) {
    const auto& edges = vine.structure.trees[t].edges;
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const EdgeFit& f = vine.edge_fits[t][k];
      std::string params = "-";
      if (!f.spec.params.empty()) {
        params.clear();
        for (std::size_t i = 0; i < f.spec.params.size(); ++i) params += (i ? ", " : "") + fixed(f.spec.params[i], 2);
      }
      std::string pair;
      for (char ch : edge_label(edges[k], vine.names)) pair += ch == '|' ? std::string("\\|") : std::string(1, ch);
      os << "| " << t + 1 << " | " << pair << " | " << display_name(f.spec) << " | "
         << fixed(vine.edge_taus[t][k], 2) << " | " << params << " | " << fixed(vine.edge_tails[t][k].lambda_lower, 2)
         << " | " << fixed(vine.edge_tails[t][k].lambda_upper, 2) << " |\n";
    }
  }
  os << "\nTotal log-likelihood: " << format_number(vine.total_loglik, 10) << " (n = " << vine.n_obs << ")\n";
  return os.str();
}

std::string tau_matrix_csv(const TauMatrix& taus) {
  std::ostringstream os;
  for (const auto& n : taus.names) os << "," << csv_field(n);
  os << "\n";
  for (Eigen::Index i = 0; i < taus.values.rows(); ++i) {
    os << csv_field(taus.names[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < taus.values.cols(); ++j) os << "," << format_number(taus.values(i, j), 6);
    os << "\n";
  }
  return os.str();
}

json white_to_json(const WhiteTestResult& r) {
  return json{{"test", "white_information_matrix"},
              {"statistic", r.statistic},
              {"p_value", r.p_value},
              {"n_bootstrap", r.n_bootstrap},
              {"failed_replicates", r.failed_replicates},
              {"per_replicate_stats", r.per_replicate_stats}};
}

// ---------------------------------------------------------------- channels

namespace {

std::int64_t parse_day(const std::string& s, std::size_t line) {
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) == 3) {
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw Error(ErrorCode::MalformedInput, "invalid date '" + s + "' at " + cell_context(line, "date"));
    return std::chrono::sys_days{ymd}.time_since_epoch().count();
  }
  double x = 0.0;
  if (parse_double(s, x) && x == std::floor(x)) return static_cast<std::int64_t>(x);
  throw Error(ErrorCode::MalformedInput, "invalid date '" + s + "' at " + cell_context(line, "date"));
}

}  // namespace

std::vector<ChannelSeries> read_channel_csv(const std::string& path) {
  const auto rows = read_csv_rows(path);
  const auto& header = rows.front();
  const std::vector<std::string> required{"date",        "channel_id", "video_id", "daily_views",
                                          "subscribers", "comments",   "uploaded"};
  std::map<std::string, std::size_t> col;
  for (const auto& name : required) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorCode::MalformedInput, "channel CSV lacks column '" + name + "'");
    col[name] = static_cast<std::size_t>(it - header.begin());
  }
  if (rows.size() < 2) throw Error(ErrorCode::MalformedInput, path + " has no data rows");

  struct DayRecord {
    double subscribers = -1.0;
    double comments = 0.0;
    int uploaded = 0;
    std::map<std::string, double> views;
  };
  std::map<std::string, std::map<std::int64_t, DayRecord>> channels;
  std::map<std::string, std::vector<std::string>> video_order;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::size_t line = r + 1;
    if (row.size() != header.size())
      throw Error(ErrorCode::MalformedInput, "line " + std::to_string(line) + " has " + std::to_string(row.size()) +
                                                 " fields, expected " + std::to_string(header.size()));
    auto number = [&](const std::string& name) {
      double x = 0.0;
      if (!parse_double(row[col[name]], x))
        throw Error(ErrorCode::MalformedInput,
                    "missing or non-numeric value '" + row[col[name]] + "' at " + cell_context(line, name));
      return x;
    };
    const std::string& channel = row[col["channel_id"]];
    const std::string& video = row[col["video_id"]];
    if (channel.empty()) throw Error(ErrorCode::MalformedInput, "empty channel id at line " + std::to_string(line));
    DayRecord& day = channels[channel][parse_day(row[col["date"]], line)];
    const double subs = number("subscribers");
    if (day.subscribers < 0.0) day.subscribers = subs;
    day.comments += number("comments");
    const double up = number("uploaded");
    if (up != 0.0 && up != 1.0)
      throw Error(ErrorCode::MalformedInput, "uploaded must be 0 or 1 at " + cell_context(line, "uploaded"));
    day.uploaded = std::max(day.uploaded, static_cast<int>(up));
    if (!video.empty()) {
      auto& order = video_order[channel];
      if (std::find(order.begin(), order.end(), video) == order.end()) order.push_back(video);
      day.views[video] += number("daily_views");
    }
  }

  std::vector<ChannelSeries> out;
  for (const auto& [id, days] : channels) {
    ChannelSeries s;
    s.channel_id = id;
    const auto& videos = video_order[id];
    const auto t = static_cast<Eigen::Index>(days.size());
    s.subscribers.resize(t);
    s.comments.resize(t);
    s.views_per_video = Matrix::Zero(t, static_cast<Eigen::Index>(videos.size()));
    Eigen::Index i = 0;
    for (const auto& [date, rec] : days) {
      s.dates.push_back(date);
      s.subscribers[i] = rec.subscribers;
      s.comments[i] = rec.comments;
      s.uploads.push_back(rec.uploaded);
      for (std::size_t v = 0; v < videos.size(); ++v) {
        const auto it = rec.views.find(videos[v]);
        if (it != rec.views.end()) s.views_per_video(i, static_cast<Eigen::Index>(v)) = it->second;
      }
      ++i;
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string channel_report_csv(const std::vector<ChannelReport>& rows) {
  auto num = [](const std::optional<double>& x) { return x ? format_number(*x, 8) : std::string{}; };
  auto flag = [](const std::optional<bool>& x) { return x ? std::string(*x ? "1" : "0") : std::string{}; };
  std::ostringstream os;
  os << "channel_id,days,excluded,box_ljung_p,model_adequate,wald_p,granger_causes,stationarity_warning,"
        "is_dominant,period_days,dominance_ratio,view_gain_frac,comment_gain_frac,note,error\n";
  for (const auto& r : rows) {
    os << csv_field(r.channel_id) << "," << r.days << "," << (r.excluded ? 1 : 0) << "," << num(r.box_ljung_p) << ","
       << flag(r.model_adequate) << "," << num(r.wald_p) << "," << flag(r.granger_causes) << ","
       << flag(r.stationarity_warning) << "," << flag(r.is_dominant) << "," << num(r.period_days) << ","
       << num(r.dominance_ratio) << "," << num(r.view_gain_frac) << "," << num(r.comment_gain_frac) << ","
       << csv_field(r.note) << "," << csv_field(r.error) << "\n";
  }
  return os.str();
}

}  // namespace vinedep
