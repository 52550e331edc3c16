#include "volcast/attention.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "volcast/csv.hpp"
#include "volcast/errors.hpp"
#include "volcast/log.hpp"

namespace volcast {

Eigen::VectorXd overlap_ratios(const Eigen::VectorXd& prev, const Eigen::VectorXd& next) {
  if (prev.size() != next.size()) throw std::invalid_argument("overlap_ratios: size mismatch");
  return next.array() / prev.array();
}

double rescaling_constant(const Eigen::VectorXd& prev, const Eigen::VectorXd& next, int width) {
  if (width < 1 || width > prev.size() || prev.size() != next.size()) {
    throw std::invalid_argument("rescaling_constant: bad overlap width");
  }
  const double num = prev.head(width).mean();
  const double den = next.head(width).mean();
  if (!(den > 0.0)) throw DataError("rescaling constant undefined: new batch overlap is all zero");
  return num / den;
}

int extend_overlap(const Eigen::VectorXd& prev, const Eigen::VectorXd& next, int width) {
  if (prev.size() != next.size()) throw std::invalid_argument("extend_overlap: size mismatch");
  const auto n = static_cast<int>(prev.size());
  width = std::max(1, std::min(width, n));
  for (int i = 0; i < n; ++i) {
    if (prev(i) != 0.0 && next(i) != 0.0) return std::max(width, i + 1);
  }
  throw DataError("no nonzero pair in the " + std::to_string(n) + "-day overlap");
}

FeatureSeries stitch_batches(const std::vector<SviBatch>& batches, int overlap) {
  if (batches.empty()) throw std::invalid_argument("stitch_batches: no batches");
  if (overlap < 1) throw std::invalid_argument("stitch_batches: overlap must be positive");
  const Date origin = batches.front().start;
  std::vector<double> out(batches.front().values.begin(), batches.front().values.end());
  for (std::size_t r = 1; r < batches.size(); ++r) {
    const SviBatch& b = batches[r];
    const Date covered_end = origin + static_cast<int>(out.size()) - 1;
    if (b.start <= batches[r - 1].start) {
      throw DataError("SVI batch " + std::to_string(b.id) + " does not start after its predecessor");
    }
    if (b.start > covered_end) {
      throw DataError("SVI batch " + std::to_string(b.id) + " does not overlap the previous batches");
    }
    const int offset = b.start - origin;
    const int common = std::min<int>(covered_end - b.start + 1, static_cast<int>(b.values.size()));
    Eigen::VectorXd prev(common), next(common);
    for (int i = 0; i < common; ++i) {
      prev(i) = out[static_cast<std::size_t>(offset + i)];
      next(i) = b.values[static_cast<std::size_t>(i)];
    }
    double c = 0.0;
    try {
      const int width = extend_overlap(prev, next, overlap);
      c = rescaling_constant(prev, next, width);
    } catch (const DataError& e) {
      throw DataError("SVI batch " + std::to_string(b.id) + ": " + e.what());
    }
    for (std::size_t i = static_cast<std::size_t>(common); i < b.values.size(); ++i) {
      out.push_back(c * b.values[i]);
    }
  }
  FeatureSeries s;
  s.values = Eigen::Map<const Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
  s.dates.reserve(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) s.dates.push_back(origin + static_cast<int>(i));
  return s;
}

FeatureSeries keyword_group_average(const std::vector<FeatureSeries>& series) {
  if (series.empty()) throw std::invalid_argument("keyword_group_average: no series");
  FeatureSeries out = series.front();
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (series[i].dates != out.dates) {
      throw DataError("keyword_group_average: series '" + series[i].name + "' has different dates");
    }
    out.values += series[i].values;
  }
  out.values /= static_cast<double>(series.size());
  return out;
}

namespace {

// Index of the trading day a calendar date is mapped to, or -1 if outside.
long trading_index(const std::vector<Date>& calendar, Date d) {
  if (calendar.empty() || d < calendar.front() || d > calendar.back()) return -1;
  return std::lower_bound(calendar.begin(), calendar.end(), d) - calendar.begin();
}

FeatureSeries empty_on(const std::vector<Date>& calendar, std::string name) {
  FeatureSeries s;
  s.name = std::move(name);
  s.dates = calendar;
  s.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(calendar.size()));
  return s;
}

}  // namespace

FeatureSeries daily_counts(const std::vector<DailyDocument>& docs, const std::string& topic,
                           const std::vector<Date>& calendar) {
  FeatureSeries s = empty_on(calendar, topic);
  for (const auto& d : docs) {
    if (d.topic != topic) continue;
    const long i = trading_index(calendar, d.date);
    if (i >= 0) s.values(i) += 1.0;
  }
  return s;
}

FeatureSeries daily_sentiment(const std::vector<DailyDocument>& docs, const std::string& topic,
                              Polarity polarity, const std::vector<Date>& calendar) {
  FeatureSeries s = empty_on(calendar, topic);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(s.values.size());
  for (const auto& d : docs) {
    if (d.topic != topic) continue;
    const long i = trading_index(calendar, d.date);
    if (i < 0) continue;
    s.values(i) += polarity == Polarity::positive ? d.pos : d.neg;
    counts(i) += 1.0;
  }
  for (Eigen::Index i = 0; i < s.values.size(); ++i) {
    if (counts(i) > 0.0) s.values(i) /= counts(i);
  }
  return s;
}

FeatureSeries to_trading_calendar(const FeatureSeries& series, const std::vector<Date>& calendar,
                                  Aggregation how) {
  FeatureSeries s = empty_on(calendar, series.name);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(s.values.size());
  for (std::size_t k = 0; k < series.dates.size(); ++k) {
    const long i = trading_index(calendar, series.dates[k]);
    if (i < 0) continue;
    s.values(i) += series.values(static_cast<Eigen::Index>(k));
    counts(i) += 1.0;
  }
  if (how == Aggregation::mean) {
    for (Eigen::Index i = 0; i < s.values.size(); ++i) {
      if (counts(i) > 0.0) s.values(i) /= counts(i);
    }
  }
  return s;
}

AnnouncementSeries align_announcements(const std::vector<Announcement>& schedule,
                                       const std::string& variable, const std::vector<Date>& calendar,
                                       int close_minute) {
  AnnouncementSeries out{empty_on(calendar, "B_" + variable), empty_on(calendar, "AA_" + variable)};
  if (calendar.empty()) return out;
  for (const auto& a : schedule) {
    if (a.variable != variable) continue;
    const Date d = a.when.date;
    if (d < calendar.front() || d > calendar.back() ||
        (d == calendar.back() && a.when.minute > close_minute)) {
      continue;
    }
    const long day = std::lower_bound(calendar.begin(), calendar.end(), d) - calendar.begin();
    if (calendar[static_cast<std::size_t>(day)] != d) {
      warn(variable + " announcement on non-trading day " + d.to_string() + " mapped to " +
           calendar[static_cast<std::size_t>(day)].to_string());
    }
    // the last trading day whose close precedes the announcement
    long t = std::upper_bound(calendar.begin(), calendar.end(), d) - calendar.begin() - 1;
    if (t >= 0 && calendar[static_cast<std::size_t>(t)] == d && a.when.minute <= close_minute) --t;
    if (t >= 0) out.dummy.values(t) = 1.0;
    out.analysts.values(day) = std::max(out.analysts.values(day), a.analyst_count);
  }
  return out;
}

std::vector<SviBatch> read_svi_batches(const std::filesystem::path& path) {
  csv::Reader reader(path);
  const auto c_id = reader.column("batch_id");
  const auto c_date = reader.column("date");
  const auto c_value = reader.column("value");
  std::vector<SviBatch> batches;
  std::unordered_map<long, std::size_t> index;
  std::vector<std::string> f;
  while (reader.next(f)) {
    if (f.size() <= std::max({c_id, c_date, c_value})) reader.fail("too few fields");
    const long id = csv::to_long(reader, f[c_id]);
    Date date;
    try {
      date = Date::parse(f[c_date]);
    } catch (const std::invalid_argument& e) {
      reader.fail(e.what());
    }
    const double v = csv::to_double(reader, f[c_value]);
    if (!(v >= 0.0 && v <= 100.0)) reader.fail("SVI value outside [0, 100]");
    auto [it, fresh] = index.try_emplace(id, batches.size());
    if (fresh) {
      batches.push_back({static_cast<int>(id), date, {}});
    }
    SviBatch& b = batches[it->second];
    if (date != b.start + static_cast<int>(b.values.size())) {
      reader.fail("batch " + std::to_string(id) + " rows are not consecutive days");
    }
    b.values.push_back(v);
  }
  std::sort(batches.begin(), batches.end(),
            [](const SviBatch& a, const SviBatch& b) { return a.start < b.start; });
  return batches;
}

std::vector<DailyDocument> read_documents(const std::filesystem::path& path) {
  csv::Reader reader(path);
  const auto c_date = reader.column("date");
  const auto c_topic = reader.column("topic");
  const auto c_pos = reader.column("pos");
  const auto c_neg = reader.column("neg");
  std::vector<DailyDocument> docs;
  std::vector<std::string> f;
  while (reader.next(f)) {
    if (f.size() <= std::max({c_date, c_topic, c_pos, c_neg})) reader.fail("too few fields");
    DailyDocument d;
    try {
      d.date = Date::parse(f[c_date]);
    } catch (const std::invalid_argument& e) {
      reader.fail(e.what());
    }
    d.topic = f[c_topic];
    d.pos = csv::to_double(reader, f[c_pos]);
    d.neg = csv::to_double(reader, f[c_neg]);
    if (!(d.pos >= 0.0 && d.pos <= 1.0 && d.neg >= 0.0 && d.neg <= 1.0)) {
      reader.fail("sentiment score outside [0, 1]");
    }
    docs.push_back(std::move(d));
  }
  return docs;
}

namespace {

std::map<std::string, std::map<Date, double>> read_all_pageviews(const std::filesystem::path& path) {
  csv::Reader reader(path);
  const auto c_date = reader.column("date");
  const auto c_page = reader.column("page");
  const auto c_views = reader.column("views");
  std::map<std::string, std::map<Date, double>> pages;
  std::vector<std::string> f;
  while (reader.next(f)) {
    if (f.size() <= std::max({c_date, c_page, c_views})) reader.fail("too few fields");
    Date d;
    try {
      d = Date::parse(f[c_date]);
    } catch (const std::invalid_argument& e) {
      reader.fail(e.what());
    }
    const double v = csv::to_double(reader, f[c_views]);
    if (!(v >= 0.0)) reader.fail("negative page views");
    pages[f[c_page]][d] += v;
  }
  return pages;
}

FeatureSeries to_series(const std::string& name, const std::map<Date, double>& m) {
  FeatureSeries s;
  s.name = name;
  s.values.resize(static_cast<Eigen::Index>(m.size()));
  Eigen::Index i = 0;
  for (const auto& [d, v] : m) {
    s.dates.push_back(d);
    s.values(i++) = v;
  }
  return s;
}

}  // namespace

FeatureSeries read_pageviews(const std::filesystem::path& path, const std::string& page) {
  const auto all = read_all_pageviews(path);
  const auto it = all.find(page);
  if (it == all.end()) return to_series(page, {});
  return to_series(page, it->second);
}

std::vector<Announcement> read_schedule(const std::filesystem::path& path) {
  csv::Reader reader(path);
  const auto c_when = reader.column("datetime");
  const auto c_var = reader.column("variable");
  const auto c_count = reader.column("analyst_count");
  std::vector<Announcement> out;
  std::vector<std::string> f;
  while (reader.next(f)) {
    if (f.size() <= std::max({c_when, c_var, c_count})) reader.fail("too few fields");
    Announcement a;
    try {
      a.when = DateTime::parse(f[c_when]);
    } catch (const std::invalid_argument& e) {
      reader.fail(e.what());
    }
    a.variable = f[c_var];
    a.analyst_count = csv::to_double(reader, f[c_count]);
    out.push_back(std::move(a));
  }
  return out;
}

// ---- manifest ------------------------------------------------------------

std::string to_string(FeatureGroup group) {
  switch (group) {
    case FeatureGroup::attention: return "attention";
    case FeatureGroup::sentiment: return "sentiment";
    case FeatureGroup::dummy: return "dummy";
  }
  return "?";
}

const FeatureDef* FeatureManifest::find(const std::string& name) const {
  for (const auto& f : features) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

namespace {

FeatureGroup parse_group(const std::string& s) {
  if (s == "attention") return FeatureGroup::attention;
  if (s == "sentiment") return FeatureGroup::sentiment;
  if (s == "dummy") return FeatureGroup::dummy;
  throw ConfigError("manifest: unknown feature group '" + s + "'");
}

void validate(const FeatureDef& f) {
  static const std::set<std::string> measures_doc{"count", "pos", "neg"};
  static const std::set<std::string> measures_sched{"dummy", "analysts"};
  const std::string where = "manifest feature '" + f.name + "': ";
  if (f.name.empty()) throw ConfigError("manifest: feature without a name");
  if (f.source == "svi") {
    if (f.files.empty()) throw ConfigError(where + "svi needs at least one file");
  } else if (f.source == "pageviews") {
    if (f.files.size() != 1 || f.pages.empty()) throw ConfigError(where + "pageviews needs file and pages");
  } else if (f.source == "documents") {
    if (f.files.size() != 1 || f.topic.empty() || !measures_doc.contains(f.measure)) {
      throw ConfigError(where + "documents needs file, topic and measure count|pos|neg");
    }
  } else if (f.source == "schedule") {
    if (f.files.size() != 1 || f.topic.empty() || !measures_sched.contains(f.measure)) {
      throw ConfigError(where + "schedule needs file, topic and measure dummy|analysts");
    }
  } else {
    throw ConfigError(where + "unknown source '" + f.source + "'");
  }
}

}  // namespace

FeatureManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open feature manifest " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  FeatureManifest m;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "svi_overlap") {
        m.svi_overlap = value.get<int>();
      } else if (key != "features") {
        throw ConfigError("manifest: unknown key '" + key + "'");
      }
    }
    std::set<std::string> seen;
    for (const auto& e : j.at("features")) {
      FeatureDef f;
      for (const auto& [key, value] : e.items()) {
        if (key == "name") f.name = value.get<std::string>();
        else if (key == "group") f.group = parse_group(value.get<std::string>());
        else if (key == "general") f.general = value.get<bool>();
        else if (key == "source") f.source = value.get<std::string>();
        else if (key == "file") f.files = {value.get<std::string>()};
        else if (key == "files") f.files = value.get<std::vector<std::string>>();
        else if (key == "pages") f.pages = value.get<std::vector<std::string>>();
        else if (key == "topic") f.topic = value.get<std::string>();
        else if (key == "measure") f.measure = value.get<std::string>();
        else throw ConfigError("manifest: unknown feature key '" + key + "'");
      }
      validate(f);
      if (!seen.insert(f.name).second) throw ConfigError("manifest: duplicate feature '" + f.name + "'");
      m.features.push_back(std::move(f));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (m.svi_overlap < 1) throw ConfigError("manifest: svi_overlap must be positive");
  return m;
}

void write_manifest(const std::filesystem::path& path, const FeatureManifest& manifest) {
  nlohmann::ordered_json j;
  j["svi_overlap"] = manifest.svi_overlap;
  j["features"] = nlohmann::ordered_json::array();
  for (const auto& f : manifest.features) {
    nlohmann::ordered_json e;
    e["name"] = f.name;
    e["group"] = to_string(f.group);
    e["general"] = f.general;
    e["source"] = f.source;
    if (f.source == "svi") {
      e["files"] = f.files;
    } else {
      e["file"] = f.files.at(0);
    }
    if (!f.pages.empty()) e["pages"] = f.pages;
    if (!f.topic.empty()) e["topic"] = f.topic;
    if (!f.measure.empty()) e["measure"] = f.measure;
    j["features"].push_back(std::move(e));
  }
  csv::open_out(path) << j.dump(2) << '\n';
}

Eigen::Index FeatureTable::column(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw DataError("feature table has no column '" + name + "'");
  return it - names.begin();
}

FeatureTable build_features(const FeatureManifest& manifest, const std::filesystem::path& base_dir,
                            const std::vector<Date>& calendar) {
  std::map<std::string, std::vector<DailyDocument>> doc_cache;
  std::map<std::string, std::map<std::string, std::map<Date, double>>> view_cache;
  std::map<std::string, std::vector<Announcement>> sched_cache;
  auto resolve = [&](const std::string& f) { return (base_dir / f).string(); };

  FeatureTable table;
  table.dates = calendar;
  table.values.resize(static_cast<Eigen::Index>(calendar.size()),
                      static_cast<Eigen::Index>(manifest.features.size()));
  for (std::size_t k = 0; k < manifest.features.size(); ++k) {
    const FeatureDef& f = manifest.features[k];
    FeatureSeries s;
    if (f.source == "svi") {
      std::vector<FeatureSeries> keywords;
      for (const auto& file : f.files) {
        keywords.push_back(to_trading_calendar(
            stitch_batches(read_svi_batches(resolve(file)), manifest.svi_overlap), calendar,
            Aggregation::mean));
      }
      s = keyword_group_average(keywords);
    } else if (f.source == "pageviews") {
      const auto path = resolve(f.files[0]);
      if (!view_cache.contains(path)) view_cache[path] = read_all_pageviews(path);
      std::vector<FeatureSeries> pages;
      for (const auto& p : f.pages) {
        const auto& all = view_cache[path];
        const auto it = all.find(p);
        const FeatureSeries raw = it == all.end() ? to_series(p, {}) : to_series(p, it->second);
        pages.push_back(to_trading_calendar(raw, calendar, Aggregation::sum));
      }
      s = keyword_group_average(pages);
    } else if (f.source == "documents") {
      const auto path = resolve(f.files[0]);
      if (!doc_cache.contains(path)) doc_cache[path] = read_documents(path);
      const auto& docs = doc_cache[path];
      if (f.measure == "count") {
        s = daily_counts(docs, f.topic, calendar);
      } else {
        s = daily_sentiment(docs, f.topic, f.measure == "pos" ? Polarity::positive : Polarity::negative,
                            calendar);
      }
    } else {
      const auto path = resolve(f.files[0]);
      if (!sched_cache.contains(path)) sched_cache[path] = read_schedule(path);
      auto a = align_announcements(sched_cache[path], f.topic, calendar);
      s = f.measure == "dummy" ? std::move(a.dummy) : std::move(a.analysts);
    }
    table.names.push_back(f.name);
    table.values.col(static_cast<Eigen::Index>(k)) = s.values;
  }
  return table;
}

void write_feature_table(const std::filesystem::path& path, const FeatureTable& table) {
  auto out = csv::open_out(path);
  out << "date";
  for (const auto& n : table.names) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < table.dates.size(); ++i) {
    out << table.dates[i].to_string();
    for (Eigen::Index k = 0; k < table.values.cols(); ++k) {
      out << ',' << csv::format(table.values(static_cast<Eigen::Index>(i), k));
    }
    out << '\n';
  }
}

FeatureTable read_feature_table(const std::filesystem::path& path) {
  csv::Reader reader(path);
  const auto& header = reader.header();
  if (header.empty() || header[0] != "date") reader.fail("first column must be 'date'");
  FeatureTable t;
  t.names.assign(header.begin() + 1, header.end());
  std::vector<double> flat;
  std::vector<std::string> f;
  while (reader.next(f)) {
    if (f.size() != header.size()) reader.fail("wrong field count");
    try {
      t.dates.push_back(Date::parse(f[0]));
    } catch (const std::invalid_argument& e) {
      reader.fail(e.what());
    }
    if (t.dates.size() > 1 && !(t.dates[t.dates.size() - 2] < t.dates.back())) {
      reader.fail("dates not increasing");
    }
    for (std::size_t k = 1; k < f.size(); ++k) flat.push_back(csv::to_double(reader, f[k]));
  }
  const auto rows = static_cast<Eigen::Index>(t.dates.size());
  const auto cols = static_cast<Eigen::Index>(t.names.size());
  t.values = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      flat.data(), rows, cols);
  return t;
}

}  // namespace volcast
