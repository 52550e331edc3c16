#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "volcast/date.hpp"

namespace volcast {

/// One download of a search-volume index: consecutive calendar days
/// starting at `start`, integers in [0, 100].
struct SviBatch {
  int id = 0;
  Date start;
  std::vector<double> values;

  [[nodiscard]] Date end() const { return start + static_cast<int>(values.size()) - 1; }
};

/// A named daily series. `dates` is strictly increasing.
struct FeatureSeries {
  std::string name;
  std::vector<Date> dates;
  Eigen::VectorXd values;
};

struct DailyDocument {
  Date date;
  std::string topic;  // "stock-market" or a macro variable
  double pos = 0.0;
  double neg = 0.0;
};

struct Announcement {
  DateTime when;
  std::string variable;
  double analyst_count = 0.0;
};

enum class Polarity { positive, negative };

/// next(i) / prev(i) for each overlap pair.
Eigen::VectorXd overlap_ratios(const Eigen::VectorXd& prev, const Eigen::VectorXd& next);

/// Rescaling constant mean(prev) / mean(next) for the first `width` overlap
/// pairs.
double rescaling_constant(const Eigen::VectorXd& prev, const Eigen::VectorXd& next, int width);

/// Smallest width >= `width` whose leading overlap window holds at least one
/// pair with both values nonzero. Throws DataError when the overlap is
/// exhausted.
int extend_overlap(const Eigen::VectorXd& prev, const Eigen::VectorXd& next, int width);

/// Chains batches into one calendar-day series. The first batch keeps its
/// scale; each later batch is multiplied by the rescaling constant computed
/// on its overlap with the already stitched series (`overlap` leading days,
/// widened when all pairs contain a zero). Overlapping days keep the
/// already stitched values.
FeatureSeries stitch_batches(const std::vector<SviBatch>& batches, int overlap = 10);

/// Pointwise mean of series with identical dates.
FeatureSeries keyword_group_average(const std::vector<FeatureSeries>& series);

/// Number of documents of `topic` mapped to each trading day. Documents on
/// non-trading days go to the next trading day; documents before the first
/// or after the last trading day are dropped.
FeatureSeries daily_counts(const std::vector<DailyDocument>& docs, const std::string& topic,
                           const std::vector<Date>& calendar);

/// Mean positive or negative score of the day's `topic` documents, same
/// day mapping as daily_counts. Days without documents get 0.
FeatureSeries daily_sentiment(const std::vector<DailyDocument>& docs, const std::string& topic,
                              Polarity polarity, const std::vector<Date>& calendar);

enum class Aggregation { sum, mean };

/// Maps a calendar-day series onto trading days: each trading day takes the
/// sum or mean of the values dated after the previous trading day up to and
/// including itself. Trading days with no input get 0.
FeatureSeries to_trading_calendar(const FeatureSeries& series, const std::vector<Date>& calendar,
                                  Aggregation how);

struct AnnouncementSeries {
  FeatureSeries dummy;     // 1 if announced after day-t close, up to the next close
  FeatureSeries analysts;  // analyst count on the announcement's trading day
};

/// Builds announcement dummies and analyst attention for `variable`.
/// Announcements dated on non-trading days are assigned to the next trading
/// day with a warning.
AnnouncementSeries align_announcements(const std::vector<Announcement>& schedule,
                                       const std::string& variable, const std::vector<Date>& calendar,
                                       int close_minute = 16 * 60);

// ---- raw file readers --------------------------------------------------

/// `batch_id,date,value`. Rows of a batch must be consecutive days.
std::vector<SviBatch> read_svi_batches(const std::filesystem::path& path);
/// `date,topic,pos,neg`.
std::vector<DailyDocument> read_documents(const std::filesystem::path& path);
/// `date,page,views` restricted to `page`, as a calendar-day series.
FeatureSeries read_pageviews(const std::filesystem::path& path, const std::string& page);
/// `datetime,variable,analyst_count`.
std::vector<Announcement> read_schedule(const std::filesystem::path& path);

// ---- manifest-driven feature table -------------------------------------

enum class FeatureGroup { attention, sentiment, dummy };

/// One manifest entry. `source` is one of svi, pageviews, documents,
/// schedule; `measure` is count/pos/neg for documents and dummy/analysts
/// for schedules. `general` marks stock-market-wide series.
struct FeatureDef {
  std::string name;
  FeatureGroup group = FeatureGroup::attention;
  bool general = false;
  std::string source;
  std::vector<std::string> files;  // svi: one file per keyword
  std::vector<std::string> pages;
  std::string topic;
  std::string measure;
};

struct FeatureManifest {
  std::vector<FeatureDef> features;
  int svi_overlap = 10;

  [[nodiscard]] const FeatureDef* find(const std::string& name) const;
};

/// Reads the JSON manifest. Throws ConfigError on unknown keys or values.
FeatureManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const FeatureManifest& manifest);

/// Wide daily table indexed by trading dates.
struct FeatureTable {
  std::vector<Date> dates;
  std::vector<std::string> names;
  Eigen::MatrixXd values;  // dates x names

  [[nodiscard]] Eigen::Index column(const std::string& name) const;
};

/// Builds every manifest feature on `calendar`. Relative file names are
/// resolved against `base_dir`.
FeatureTable build_features(const FeatureManifest& manifest, const std::filesystem::path& base_dir,
                            const std::vector<Date>& calendar);

void write_feature_table(const std::filesystem::path& path, const FeatureTable& table);
FeatureTable read_feature_table(const std::filesystem::path& path);

std::string to_string(FeatureGroup group);

}  // namespace volcast
