#pragma once

// Closed-form delay bound and suitable chunk-size range extraction.

#include <chunksim/errors.hpp>
#include <chunksim/model.hpp>

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace chunksim {

// Minimal diffusion delay of a chunk to n peers when every sender pushes to m
// peers at once and latencies are ignored.
inline double d_min(int m, double c, int n, double s)
{
	if (m < 1) throw InvalidConfig("m", "must be >= 1");
	if (n < 1) throw InvalidConfig("n", "must be >= 1");
	if (!(s > 0.0)) throw InvalidConfig("s", "must be positive");
	return static_cast<double>(m) * c * std::log(static_cast<double>(n))
		/ (std::log1p(static_cast<double>(m)) * s);
}

inline double d_min(SimConfig const& c)
{
	return d_min(c.max_parallel_uploads, c.chunk_size, c.n, c.stream_rate);
}

struct RangeThresholds
{
	double loss = 0.01;      // lower end: miss ratio no larger than this
	double plateau = 1e-4;   // upper end: no missing chunks
};

struct SuitableRange
{
	double c_low;
	double c_high;
	RangeThresholds thresholds;
};

struct SweepPoint
{
	double c;
	double miss_ratio;
};

namespace detail {

// Smallest c at which the miss ratio has dropped to `theta`, interpolating
// the miss ratio linearly in log(c) between the two bracketing points.
inline std::optional<double> first_crossing(std::span<SweepPoint const> sweep, double theta)
{
	if (sweep.empty() || sweep.front().miss_ratio <= theta) return std::nullopt;
	for (std::size_t i = 1; i < sweep.size(); ++i) {
		auto const& a = sweep[i - 1];
		auto const& b = sweep[i];
		if (b.miss_ratio > theta) continue;
		double const la = std::log(a.c);
		double const lb = std::log(b.c);
		double const f = (a.miss_ratio - theta) / (a.miss_ratio - b.miss_ratio);
		return std::exp(la + f * (lb - la));
	}
	return std::nullopt;
}

} // namespace detail

// `sweep` must be sorted by increasing c. Both thresholds have to be crossed
// going up in c: the first point must miss more than the threshold and some
// later point must miss no more than it.
inline SuitableRange suitable_range(std::span<SweepPoint const> sweep, RangeThresholds th = {})
{
	if (sweep.size() < 4) throw RangeNotBracketed("need at least four sweep points");
	for (std::size_t i = 1; i < sweep.size(); ++i)
		if (!(sweep[i].c > sweep[i - 1].c)) throw RangeNotBracketed("sweep is not sorted by increasing c");
	for (auto const& p : sweep)
		if (!(p.c > 0.0)) throw RangeNotBracketed("chunk sizes must be positive");

	auto low = detail::first_crossing(sweep, th.loss);
	if (!low) throw RangeNotBracketed("miss ratio never crosses the loss threshold");
	auto high = detail::first_crossing(sweep, th.plateau);
	if (!high) throw RangeNotBracketed("miss ratio never reaches the plateau threshold");
	return {*low, *high, th};
}

inline SuitableRange suitable_range(std::vector<std::pair<double, MetricsReport>> const& sweep,
	RangeThresholds th = {})
{
	std::vector<SweepPoint> points;
	points.reserve(sweep.size());
	for (auto const& [c, r] : sweep) points.push_back({c, r.miss_ratio});
	return suitable_range(std::span<SweepPoint const>(points), th);
}

} // namespace chunksim
