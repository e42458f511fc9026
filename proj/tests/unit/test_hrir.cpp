#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>

#include "binloc/error.hpp"
#include "binloc/hrir.hpp"
#include "oracles.hpp"

using namespace binloc;

namespace {

constexpr double kPi = std::numbers::pi;

template <class F>
ErrorKind kind_of(F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no binloc::Error thrown";
  return ErrorKind::kIo;
}

const HrirSet& standard_head() {
  static const HrirSet set = synth_spherical_head({}, DoaGrid::standard());
  return set;
}

std::vector<char> file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void put_bytes(const std::filesystem::path& p, const std::vector<char>& b) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(b.data(), static_cast<std::streamsize>(b.size()));
}

}  // namespace

TEST(DoaGrid, StandardHas25Directions) {
  const auto g = DoaGrid::standard();
  ASSERT_EQ(g.size(), 25u);
  const std::vector<double> want{-80, -65, -55, -45, -40, -35, -30, -25, -20, -15, -10, -5, 0,
                                 5,   10,  15,  20,  25,  30,  35,  40,  45,  55,  65,  80};
  EXPECT_EQ(g.azimuths(), want);
  EXPECT_TRUE(g.contains(-55));
  EXPECT_FALSE(g.contains(50));
}

TEST(DoaGrid, FullCircleAndValidation) {
  const auto g = DoaGrid::full_circle(5.0);
  EXPECT_EQ(g.size(), 72u);
  EXPECT_EQ(g.azimuths().front(), -180.0);
  EXPECT_EQ(g.azimuths().back(), 175.0);
  EXPECT_EQ(kind_of([] { DoaGrid({0.0, 0.0}); }), ErrorKind::kValidation);
  EXPECT_EQ(kind_of([] { DoaGrid({10.0, 5.0}); }), ErrorKind::kValidation);
  EXPECT_EQ(kind_of([] { DoaGrid({180.0}); }), ErrorKind::kValidation);
}

TEST(WrapDegrees, MapsIntoHalfOpenRange) {
  EXPECT_DOUBLE_EQ(wrap_degrees(180.0), -180.0);
  EXPECT_DOUBLE_EQ(wrap_degrees(-180.0), -180.0);
  EXPECT_DOUBLE_EQ(wrap_degrees(190.0), -170.0);
  EXPECT_DOUBLE_EQ(wrap_degrees(-190.0), 170.0);
  EXPECT_DOUBLE_EQ(wrap_degrees(720.0 + 30.0), 30.0);
}

TEST(Woodworth, InterauralDelayAt90Degrees) {
  const double a = 0.0875, c = 343.0;
  const double itd = woodworth_delay(a, c, 90.0, -90.0) - woodworth_delay(a, c, 90.0, 90.0);
  EXPECT_NEAR(itd, a / c * (1.0 + kPi / 2.0), 1e-15);
  EXPECT_NEAR(itd, 0.656e-3, 0.5e-6);
  // Per ear: tau = (a/c)(sin th + th) split across lit and shadowed sides.
  EXPECT_NEAR(woodworth_delay(a, c, 0.0, 90.0), 0.0, 1e-15);
  EXPECT_NEAR(woodworth_delay(a, c, 30.0, -90.0) - woodworth_delay(a, c, 30.0, 90.0),
              a / c * (std::sin(kPi / 6) + kPi / 6), 1e-15);
}

TEST(SphericalHead, FrontalDirectionHasIdenticalEars) {
  const auto& set = standard_head();
  const auto i = *set.find(0.0);
  const auto l = set.taps(i, 0), r = set.taps(i, 1);
  for (std::size_t t = 0; t < set.length(); ++t) EXPECT_EQ(l[t], r[t]);
}

TEST(SphericalHead, UnitEnergyBeforeLevelFilter) {
  // At 0 degrees the level filter is a pure delta, so the taps keep unit energy.
  const auto& set = standard_head();
  const auto i = *set.find(0.0);
  for (std::size_t ch = 0; ch < 2; ++ch) {
    double e = 0.0;
    for (float v : set.taps(i, ch)) e += static_cast<double>(v) * v;
    EXPECT_NEAR(e, 1.0, 1e-6);
  }
}

TEST(SphericalHead, MirrorSymmetry) {
  const auto set = synth_spherical_head({}, DoaGrid({-30.0, 30.0}));
  const auto a = set.taps(0, 0), b = set.taps(1, 1), c = set.taps(0, 1), d = set.taps(1, 0);
  for (std::size_t t = 0; t < set.length(); ++t) {
    EXPECT_EQ(a[t], b[t]);
    EXPECT_EQ(c[t], d[t]);
  }
}

TEST(SphericalHead, CrossCorrelationRecoversItd) {
  SphericalHeadParams p;
  p.max_ild_db = 0.0;  // pure delays
  const auto set = synth_spherical_head(p, DoaGrid({90.0}));
  std::vector<double> l(set.taps(0, 0).begin(), set.taps(0, 0).end());
  std::vector<double> r(set.taps(0, 1).begin(), set.taps(0, 1).end());
  // Right ear leads by 10.5 samples; the correlation peak sits on a neighbor.
  const int lag = oracle::xcorr_peak_lag(l, r, 20);
  EXPECT_TRUE(lag == -10 || lag == -11) << lag;
  // Sub-sample check: phase slope of the cross-spectrum below 2 kHz.
  std::vector<double> lp(4096, 0.0), rp(4096, 0.0);
  std::copy(l.begin(), l.end(), lp.begin());
  std::copy(r.begin(), r.end(), rp.begin());
  const auto L = oracle::naive_dft(lp), R = oracle::naive_dft(rp);
  double num = 0.0, den = 0.0, prev = 0.0, unwrap = 0.0;
  for (std::size_t k = 1; k * 16000.0 / 4096 < 2000.0; ++k) {
    double ph = std::arg(L[k] * std::conj(R[k]));
    while (ph - prev > kPi) ph -= 2 * kPi;
    while (ph - prev < -kPi) ph += 2 * kPi;
    prev = ph;
    unwrap = ph;
    const double w = 2 * kPi * static_cast<double>(k) * 16000.0 / 4096;
    num += w * unwrap;
    den += w * w;
  }
  EXPECT_NEAR(-num / den, 0.0875 / 343.0 * (1 + kPi / 2), 2e-6);
}

TEST(SphericalHead, CapacityError) {
  SphericalHeadParams p;
  p.length = 40;
  EXPECT_EQ(kind_of([&] { synth_spherical_head(p, DoaGrid::standard()); }), ErrorKind::kLength);
  p = {};
  p.radius_m = 0.0;
  EXPECT_EQ(kind_of([&] { synth_spherical_head(p, DoaGrid::standard()); }),
            ErrorKind::kValidation);
}

TEST(SphericalHead, IldFollowsTheLevelModel) {
  EXPECT_DOUBLE_EQ(spherical_ild_db(6.0, 90.0, 90.0, 4000.0), 6.0);
  EXPECT_DOUBLE_EQ(spherical_ild_db(6.0, 90.0, -90.0, 8000.0), -6.0);
  EXPECT_DOUBLE_EQ(spherical_ild_db(6.0, 90.0, 90.0, 2000.0), 3.0);
  EXPECT_NEAR(spherical_ild_db(6.0, 0.0, 90.0, 4000.0), 0.0, 1e-15);
}

TEST(HrirSet, FindAndNearest) {
  const auto& set = standard_head();
  EXPECT_EQ(*set.find(-80.0), 0u);
  EXPECT_FALSE(set.find(50.0).has_value());
  EXPECT_EQ(set.grid()[set.nearest(52.0)].azimuth_deg, 55.0);
  EXPECT_EQ(set.grid()[set.nearest(50.0)].azimuth_deg, 45.0);  // tie -> lower index
  EXPECT_EQ(set.grid()[set.nearest(179.0)].azimuth_deg, 80.0);
}

TEST(HrirSet, ConstructorValidation) {
  std::vector<Direction> dup{{10.0, 0.0}, {10.0, 0.0}};
  EXPECT_EQ(kind_of([&] { HrirSet(16000, dup, 4, std::vector<float>(16), "x"); }),
            ErrorKind::kValidation);
  std::vector<Direction> one{{0.0, 0.0}};
  EXPECT_EQ(kind_of([&] { HrirSet(16000, one, 4, std::vector<float>(7), "x"); }),
            ErrorKind::kShape);
  std::vector<float> bad(8, 0.0f);
  bad[3] = INFINITY;
  EXPECT_EQ(kind_of([&] { HrirSet(16000, one, 4, bad, "x"); }), ErrorKind::kValidation);
}

TEST(HrirFile, RoundTripIsBitExact) {
  const auto dir = oracle::temp_dir("hrs");
  const auto& set = standard_head();
  save_hrir_set(dir / "a.hrs", set);
  const auto back = load_hrir_set(dir / "a.hrs");
  EXPECT_EQ(back.sample_rate(), set.sample_rate());
  EXPECT_EQ(back.grid(), set.grid());
  EXPECT_EQ(back.length(), 200u);
  EXPECT_EQ(back.head_id(), set.head_id());
  ASSERT_EQ(back.taps().size(), set.taps().size());
  EXPECT_TRUE(std::equal(back.taps().begin(), back.taps().end(), set.taps().begin()));
  save_hrir_set(dir / "b.hrs", back);
  EXPECT_EQ(oracle::sha256_file(dir / "a.hrs"), oracle::sha256_file(dir / "b.hrs"));
  std::filesystem::remove_all(dir);
}

TEST(HrirFile, CorruptFilesAreRejected) {
  const auto dir = oracle::temp_dir("hrs");
  save_hrir_set(dir / "a.hrs", standard_head());
  auto bytes = file_bytes(dir / "a.hrs");

  auto truncated = bytes;
  truncated.resize(bytes.size() - 100);
  put_bytes(dir / "t.hrs", truncated);
  EXPECT_EQ(kind_of([&] { load_hrir_set(dir / "t.hrs"); }), ErrorKind::kLength);

  auto magic = bytes;
  magic[0] = 'X';
  put_bytes(dir / "m.hrs", magic);
  EXPECT_EQ(kind_of([&] { load_hrir_set(dir / "m.hrs"); }), ErrorKind::kFormat);

  // Second grid entry overwritten with the first: duplicate direction.
  auto dup = bytes;
  std::copy(dup.begin() + 16, dup.begin() + 24, dup.begin() + 24);
  put_bytes(dir / "d.hrs", dup);
  EXPECT_EQ(kind_of([&] { load_hrir_set(dir / "d.hrs"); }), ErrorKind::kValidation);

  EXPECT_EQ(kind_of([&] { load_hrir_set(dir / "missing.hrs"); }), ErrorKind::kIo);
  std::filesystem::remove_all(dir);
}

TEST(DirectPathTf, FrontalChannelsAreEqual) {
  const auto tf = direct_path_tf(standard_head(), 0.0, StftConfig{});
  ASSERT_EQ(tf[0].size(), 128u);
  for (std::size_t k = 0; k < 128; ++k) EXPECT_EQ(tf[0][k], tf[1][k]);
}

TEST(DirectPathTf, MirrorSymmetry) {
  const StftConfig cfg;
  const auto grid = DoaGrid::standard();
  for (double az : grid.azimuths()) {
    const auto a = direct_path_tf(standard_head(), az, cfg);
    const auto b = direct_path_tf(standard_head(), -az, cfg);
    for (std::size_t k = 0; k < 128; ++k) {
      EXPECT_NEAR(std::abs(a[0][k] - b[1][k]), 0.0, 1e-9);
      EXPECT_NEAR(std::abs(a[1][k] - b[0][k]), 0.0, 1e-9);
    }
  }
}

TEST(DirectPathTf, FiveSampleDelayHasLinearPhase) {
  std::vector<float> taps(2 * 64, 0.0f);
  taps[5] = 1.0f;
  taps[64 + 5] = 1.0f;
  const HrirSet set(16000, {{0.0, 0.0}}, 64, taps, "delta");
  const StftConfig cfg;
  const auto tf = direct_path_tf(set, 0.0, cfg);
  for (std::size_t k = 0; k < 128; ++k) {
    const double f = cfg.band_hz(k);
    const Complex want = std::polar(1.0, -2 * kPi * f * 5.0 / 16000.0);
    EXPECT_NEAR(std::abs(tf[0][k] - want), 0.0, 1e-12);
  }
}

TEST(DirectPathTf, Errors) {
  EXPECT_EQ(kind_of([] { direct_path_tf(standard_head(), 50.0, StftConfig{}); }),
            ErrorKind::kLookup);
  StftConfig other;
  other.sample_rate = 48000;
  EXPECT_EQ(kind_of([&] { direct_path_tf(standard_head(), 0.0, other); }), ErrorKind::kShape);
}

TEST(FractionalImpulse, IntegerDelayIsSingleTap) {
  std::vector<double> out(100, 0.0);
  add_fractional_impulse(out, 40.0, 0.5);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], i == 40 ? 0.5 : 0.0);
}

TEST(FractionalImpulse, HalfSampleIsSymmetricAndLowpassUnitGain) {
  std::vector<double> out(200, 0.0);
  add_fractional_impulse(out, 100.5, 1.0);
  for (int k = 0; k < 30; ++k) EXPECT_NEAR(out[100 - k], out[101 + k], 1e-14);
  // DC gain of a windowed sinc is close to one.
  double dc = 0.0;
  for (double v : out) dc += v;
  EXPECT_NEAR(dc, 1.0, 0.01);
}

TEST(FractionalImpulse, AccurateJustBelowAnInteger) {
  for (double eps : {1e-15, 1e-12, 1e-9}) {
    std::vector<double> out(64, 0.0);
    add_fractional_impulse(out, 21.0 - eps, 1.0);
    EXPECT_NEAR(out[21], 1.0, 1e-12) << eps;
    EXPECT_NEAR(out[20], 0.0, 2 * eps) << eps;
  }
}
