#include "skyspeed/tracking.hpp"

#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "skyspeed/error.hpp"

namespace skyspeed {
namespace {

TrackerConfig gate(double radius, std::int64_t min_len = 1) {
  TrackerConfig c;
  c.gate_radius_px = radius;
  c.min_track_length = min_len;
  return c;
}

RectifiedDetection car(double x, double y) { return {{x, y}, Category::Car}; }

TEST(TrackerStep, MatchesNearbyDetection) {
  Tracker t(gate(50));
  const std::vector<RectifiedDetection> f0 = {car(10, 10)};
  const std::vector<RectifiedDetection> f1 = {car(12, 10)};
  const auto a = t.step(0, f0);
  const auto b = t.step(1, f1);
  EXPECT_EQ(a, b);
  ASSERT_EQ(t.tracks().size(), 1u);
  EXPECT_EQ(t.tracks()[0].history.size(), 2u);
  EXPECT_EQ(t.tracks()[0].last().position, (RectifiedPoint{12, 10}));
}

TEST(TrackerStep, OutOfGateSpawnsNewTrack) {
  Tracker t(gate(50));
  const std::vector<RectifiedDetection> f0 = {car(10, 10)};
  const std::vector<RectifiedDetection> f1 = {car(100, 10)};
  t.step(0, f0);
  const auto ids = t.step(1, f1);
  ASSERT_EQ(t.tracks().size(), 2u);
  EXPECT_EQ(t.find(1)->missed_frames, 1);
  EXPECT_EQ(t.find(1)->history.size(), 1u);
  EXPECT_EQ(ids, std::vector<TrackId>{2});
  EXPECT_EQ(t.find(2)->first().position, (RectifiedPoint{100, 10}));
}

TEST(TrackerStep, TwoTrackPairing) {
  Tracker t(gate(50));
  const std::vector<RectifiedDetection> f0 = {car(0, 0), car(30, 0)};
  const std::vector<RectifiedDetection> f1 = {car(5, 0), car(28, 0)};
  EXPECT_EQ(t.step(0, f0), (std::vector<TrackId>{1, 2}));
  EXPECT_EQ(t.step(1, f1), (std::vector<TrackId>{1, 2}));
}

TEST(TrackerStep, CategoryMustMatch) {
  Tracker t(gate(50));
  const std::vector<RectifiedDetection> f0 = {car(0, 0)};
  const std::vector<RectifiedDetection> f1 = {{{1, 0}, Category::HeavyVehicle}};
  t.step(0, f0);
  EXPECT_EQ(t.step(1, f1), std::vector<TrackId>{2});
}

TEST(TrackerStep, RejectsNonIncreasingFrames) {
  Tracker t(gate(50));
  t.step(3, {});
  try {
    t.step(3, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonMonotonicFrames);
  }
  EXPECT_THROW(t.step(2, {}), Error);
}

TEST(TrackerStep, InvalidConfig) {
  EXPECT_THROW(Tracker(gate(0)), Error);
  TrackerConfig c = gate(5);
  c.max_missed = 0;
  EXPECT_THROW(Tracker{c}, Error);
}

TEST(TrackerStep, FinalizesAfterMaxMissed) {
  TrackerConfig c = gate(50);
  c.max_missed = 3;
  Tracker t(c);
  const std::vector<RectifiedDetection> f0 = {car(0, 0)};
  t.step(0, f0);
  t.step(1, {});
  t.step(2, {});
  EXPECT_EQ(t.tracks()[0].state, TrackState::Active);
  t.step(3, {});
  EXPECT_EQ(t.tracks()[0].state, TrackState::Finalized);
  // A finalized track takes no more points.
  const std::vector<RectifiedDetection> f4 = {car(1, 0)};
  EXPECT_EQ(t.step(4, f4), std::vector<TrackId>{2});
  EXPECT_EQ(t.find(1)->history.size(), 1u);
}

TEST(TrackerStep, FrameGapCountsAsMissed) {
  TrackerConfig c = gate(50);
  c.max_missed = 3;
  Tracker t(c);
  const std::vector<RectifiedDetection> f0 = {car(0, 0)};
  const std::vector<RectifiedDetection> later = {car(1, 0)};
  t.step(0, f0);
  EXPECT_EQ(t.step(3, later), std::vector<TrackId>{1});  // two skipped frames
  EXPECT_EQ(t.step(7, later), std::vector<TrackId>{2});  // three skipped frames
}

TEST(FinalizeAll, Empty) {
  Tracker t(gate(50));
  const auto r = t.finalize_all();
  EXPECT_TRUE(r.tracks.empty());
  EXPECT_EQ(r.rejects, 0u);
}

TEST(FinalizeAll, ShortTrackRejected) {
  Tracker t(gate(50, 5));
  for (int f = 0; f < 2; ++f) {
    const std::vector<RectifiedDetection> d = {car(f, 0)};
    t.step(f, d);
  }
  const auto r = t.finalize_all();
  EXPECT_TRUE(r.tracks.empty());
  EXPECT_EQ(r.rejects, 1u);
  EXPECT_TRUE(t.tracks().empty());
}

TEST(FinalizeAll, LongTrackKept) {
  Tracker t(gate(50, 5));
  for (int f = 0; f < 20; ++f) {
    const std::vector<RectifiedDetection> d = {car(3.0 * f, 0)};
    t.step(f, d);
  }
  const auto r = t.finalize_all();
  ASSERT_EQ(r.tracks.size(), 1u);
  EXPECT_EQ(r.rejects, 0u);
  EXPECT_EQ(r.tracks[0].state, TrackState::Finalized);
  EXPECT_EQ(r.tracks[0].history.size(), 20u);
}

TEST(DrainFinalized, LeavesActiveTracks) {
  TrackerConfig c = gate(50);
  c.max_missed = 1;
  Tracker t(c);
  const std::vector<RectifiedDetection> f0 = {car(0, 0)};
  const std::vector<RectifiedDetection> f1 = {car(500, 0)};
  t.step(0, f0);
  t.step(1, f1);
  const auto r = t.drain_finalized();
  ASSERT_EQ(r.tracks.size(), 1u);
  EXPECT_EQ(r.tracks[0].id, 1);
  ASSERT_EQ(t.tracks().size(), 1u);
  EXPECT_EQ(t.tracks()[0].id, 2);
}

// Greedy assignment against an exhaustive search on small random instances.
TEST(TrackerStep, MatchesExhaustiveOracleOnSmallInstances) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pos(0.0, 60.0);
  std::uniform_int_distribution<int> count(1, 3);
  std::uniform_int_distribution<int> coin(0, 3);
  const double radius = 25.0;
  for (int trial = 0; trial < 2000; ++trial) {
    Tracker t(gate(radius));
    std::vector<RectifiedDetection> f0(count(rng));
    for (auto& d : f0) d = {{pos(rng), pos(rng)}, coin(rng) == 0 ? Category::HeavyVehicle : Category::Car};
    t.step(0, f0);
    std::vector<RectifiedDetection> f1(count(rng));
    for (auto& d : f1) d = {{pos(rng), pos(rng)}, coin(rng) == 0 ? Category::HeavyVehicle : Category::Car};

    std::vector<oracle::Edge> edges;
    for (std::size_t k = 0; k < f0.size(); ++k) {
      for (std::size_t d = 0; d < f1.size(); ++d) {
        if (f0[k].category != f1[d].category) continue;
        const double dist = std::hypot(f1[d].position.x - f0[k].position.x,
                                       f1[d].position.y - f0[k].position.y);
        if (dist <= radius) edges.push_back({dist, static_cast<std::int64_t>(k + 1), d});
      }
    }
    const auto expected = oracle::best_maximal_matching(edges);
    const auto ids = t.step(1, f1);
    std::vector<std::pair<std::int64_t, std::size_t>> got;
    for (std::size_t d = 0; d < ids.size(); ++d) {
      if (ids[d] <= static_cast<TrackId>(f0.size())) got.emplace_back(ids[d], d);
    }
    std::sort(got.begin(), got.end());
    ASSERT_EQ(got, expected) << "trial " << trial;
  }
}

TEST(TrackerStep, Deterministic) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(0.0, 200.0);
  std::vector<std::vector<RectifiedDetection>> frames(40);
  for (auto& f : frames) {
    f.resize(4);
    for (auto& d : f) d = car(pos(rng), pos(rng));
  }
  // Exact ties: equidistant detections.
  frames[5] = {car(10, 10), car(10, 10), car(20, 10)};
  auto run = [&] {
    Tracker t(gate(40));
    std::vector<std::vector<TrackId>> out;
    for (std::size_t i = 0; i < frames.size(); ++i) out.push_back(t.step(i, frames[i]));
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST(TrackerConfig, Defaults) {
  const auto c = TrackerConfig::defaults_for(180);
  EXPECT_DOUBLE_EQ(c.gate_radius_px, 45.0);
  EXPECT_EQ(c.max_missed, 5);
  EXPECT_EQ(c.min_track_length, 5);
}

}  // namespace
}  // namespace skyspeed
