#include "vanc/runner.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "vanc/control.hpp"
#include "vanc/dsp.hpp"
#include "vanc/errors.hpp"
#include "vanc/sensing.hpp"

namespace vanc {

namespace {

enum Stream : std::uint64_t { kSourceStream = 1, kLdvStream, kIdExciteStream, kIdLdvStream };

SceneGeometry geometry_of(const ScenarioConfig& c) {
  return SceneGeometry::headrest(c.ear, c.membrane_location, c.sources, c.speaker_spacing_m,
                                 c.speaker_azimuth_deg);
}

std::size_t path_taps_of(const ScenarioConfig& c, const SceneGeometry& g) {
  const double margin = c.head ? c.head->amplitude_m + 0.01 : 0.0;
  return required_path_taps(g, c.sample_rate, margin);
}

Position3 head_at(const ScenarioConfig& c, double t) {
  return c.head ? head_position(*c.head, t) : Position3{};
}

Signal make_source(const ScenarioConfig& c) {
  const auto n = static_cast<std::size_t>(std::lround(c.duration_s * c.sample_rate));
  if (c.source_kind == SourceKind::grey_noise) {
    Signal s = generate_grey_noise(c.duration_s, c.sample_rate, c.band, c.target_spl_db,
                                   derive_seed(c.seed, kSourceStream));
    s.samples.resize(n, 0.0);
    return s;
  }
  Signal w = load_wav(c.source_wav);
  if (w.sample_rate != c.sample_rate) w = resample_linear(w, c.sample_rate);
  if (w.samples.empty()) throw ConfigError("source.wav: empty recording");
  Signal s{std::vector<double>(n), c.sample_rate};
  for (std::size_t i = 0; i < n; ++i) s.samples[i] = w.samples[i % w.samples.size()];
  return s;
}

struct PassResult {
  Signal eardrum, membrane;
  GuardReport guard;
  BeamReport beam;
  std::vector<TrackerLogRow> log;
  std::vector<FrameImage> frames;
  std::vector<double> coefficients;
};

PassResult simulate(const ScenarioConfig& c, const Signal& x, bool control,
                    const PathFIR* identified) {
  const int fs = c.sample_rate;
  const SceneGeometry geometry = geometry_of(c);
  Scene scene(geometry, fs, path_taps_of(c, geometry));
  MembranePickup pickup(geometry.ear_membrane, fs);
  Ldv ldv({c.ldv_noise, c.ldv_noise_density, c.ldv_dropout_db}, fs, derive_seed(c.seed, kLdvStream));

  const std::size_t n_total = x.samples.size();
  PassResult out;
  out.eardrum = {std::vector<double>(n_total), fs};
  out.membrane = {std::vector<double>(n_total), fs};

  const bool exact = c.secondary_path == SecondaryPathMode::exact;
  std::optional<FxLmsController> ctrl;
  if (control) {
    scene.set_head_offset(head_at(c, 0.0));
    PathFIR s_hat = exact || !identified
                        ? exact_secondary_estimate(scene, pickup.response(), c.ldv_incidence_deg,
                                                   c.secondary_taps)
                        : *identified;
    ctrl.emplace(std::move(s_hat),
                 FxLmsController::Options{c.control_taps, c.mu0, c.normalized, 1e-12, c.leakage});
    if (c.guard_enabled) {
      ctrl->attach_guard(DivergenceGuard(
          {c.guard_window_s, c.guard_trip_ratio, c.guard_arm(), c.guard_freeze}, fs));
    }
  }

  const Camera& camera = c.camera;
  std::optional<Tracker> tracker;
  if (c.tracking_enabled) {
    tracker.emplace(calibrate_camera(camera, 0.01, c.threshold),
                    Tracker::Options{c.frame_rate, c.threshold, {0, c.marker_offset_m}, c.tracker_mode});
  }
  std::deque<Vec2> in_flight;
  Vec2 beam{0, c.marker_offset_m};  // aimed at the membrane rest position

  const std::size_t n_sources = geometry.primary_sources.size();
  std::vector<double> sources(n_sources);
  double controls[2] = {0, 0};
  const std::size_t active = geometry.active_speaker();

  for (std::size_t k = 0;; ++k) {
    const auto n0 = static_cast<std::size_t>(std::floor(k * fs / c.frame_rate));
    if (n0 >= n_total) break;
    const auto n1 = std::min(
        n_total, static_cast<std::size_t>(std::floor((k + 1) * fs / c.frame_rate)));

    const Position3 head = head_at(c, static_cast<double>(n0) / fs);
    if (!(head == scene.head_offset())) {
      scene.set_head_offset(head);
      pickup.set_center(scene.membrane_position());
      if (ctrl && exact)
        ctrl->set_secondary_estimate(exact_secondary_estimate(
            scene, pickup.response(), c.ldv_incidence_deg, c.secondary_taps));
    }
    const Vec2 marker{head.x, head.z};
    const Vec2 membrane_center = marker + Vec2{0, c.marker_offset_m};

    if (tracker) {
      FrameImage frame = render_frame(marker, camera);
      const GalvoCommand cmd = tracker->step(frame);
      in_flight.push_back(cmd.beam_target);
      if (in_flight.size() > static_cast<std::size_t>(c.latency_frames)) {
        beam = in_flight.front();
        in_flight.pop_front();
      }
      TrackerLogRow row{k, std::nullopt, beam, cmd.lost};
      if (!cmd.lost) row.centroid = tracker->previous_centroid();
      out.log.push_back(row);
      if (cmd.lost) ++out.beam.lost_frames;
      if (out.frames.size() < static_cast<std::size_t>(c.dump_frames))
        out.frames.push_back(std::move(frame));
    }

    const BeamState bs{beam.u - membrane_center.u, beam.v - membrane_center.v,
                       c.ldv_incidence_deg};
    ++out.beam.frames;
    out.beam.max_offset_m = std::max(out.beam.max_offset_m, bs.offset());
    if (bs.offset() <= pickup.radius_m()) ++out.beam.frames_on_membrane;

    for (std::size_t n = n0; n < n1; ++n) {
      const double xn = x.samples[n];
      std::fill(sources.begin(), sources.end(), xn);
      controls[active] = ctrl ? ctrl->output(xn) : 0.0;
      const ScenePressures p = scene.step(sources, controls);
      const double v = pickup.velocity(p.membrane);
      const LdvReading r = ldv.measure(bs, pickup, v);
      if (!r.on_membrane && !out.beam.first_loss_s)
        out.beam.first_loss_s = static_cast<double>(n) / fs;
      if (ctrl) ctrl->adapt(r.velocity);
      out.eardrum.samples[n] = p.eardrum;
      out.membrane.samples[n] = p.membrane;
    }
  }

  if (ctrl) {
    out.coefficients.assign(ctrl->coefficients().begin(), ctrl->coefficients().end());
    if (const auto& g = ctrl->guard()) {
      out.guard.enabled = true;
      out.guard.tripped = g->tripped();
      out.guard.baseline_power = g->baseline_power();
      if (g->trip_sample()) out.guard.trip_time_s = static_cast<double>(*g->trip_sample()) / fs;
    }
  }
  return out;
}

IdentificationReport identify(const ScenarioConfig& c) {
  const int fs = c.sample_rate;
  const SceneGeometry geometry = geometry_of(c);
  Scene scene(geometry, fs, path_taps_of(c, geometry));
  scene.set_head_offset(head_at(c, 0.0));
  MembranePickup pickup(geometry.ear_membrane, fs);
  Ldv ldv({c.ldv_noise, c.ldv_noise_density, c.ldv_dropout_db}, fs,
          derive_seed(c.seed, kIdLdvStream));
  Rng rng(derive_seed(c.seed, kIdExciteStream));

  const auto n = static_cast<std::size_t>(std::lround(c.id_duration_s * fs));
  Signal excite{std::vector<double>(n), fs};
  Signal response{std::vector<double>(n), fs};
  const std::vector<double> silent(geometry.primary_sources.size(), 0.0);
  double controls[2] = {0, 0};
  const BeamState centred{0, 0, c.ldv_incidence_deg};
  for (std::size_t i = 0; i < n; ++i) {
    const double u = c.id_excitation_rms * rng.gaussian();
    controls[geometry.active_speaker()] = u;
    const ScenePressures p = scene.step(silent, controls);
    excite.samples[i] = u;
    response.samples[i] = ldv.measure(centred, pickup, pickup.velocity(p.membrane)).velocity;
  }
  IdentificationReport rep;
  rep.truth = exact_secondary_estimate(scene, pickup.response(), c.ldv_incidence_deg,
                                       c.secondary_taps);
  IdentificationResult id =
      identify_secondary_path(excite, response, c.secondary_taps, c.id_mu, &rep.truth);
  rep.estimate = std::move(id.estimate);
  rep.misalignment_db = id.misalignment_db;
  return rep;
}

double window_spl(const Signal& s, double t0, double t1, Band band) {
  return overall_spl(s.slice(t0, t1), band);
}

}  // namespace

PathFIR exact_secondary_estimate(const Scene& scene, const PathFIR& membrane,
                                 double incidence_deg, std::size_t taps) {
  PathFIR s = convolve(scene.paths().secondary[scene.geometry().active_speaker()], membrane);
  s.taps.resize(taps, 0.0);
  const double g = incidence_gain(incidence_deg);
  for (double& t : s.taps) t *= g;
  return s;
}

std::vector<BandMetric> band_metrics(const Spectrum& off, const Spectrum& on, Band range) {
  std::vector<BandMetric> out;
  for (const Band& b : third_octave_bands(range)) {
    const double lo = band_level(off, b);
    const double hi = band_level(on, b);
    out.push_back({b, lo, hi, attenuation(lo, hi)});
  }
  return out;
}

IdentificationReport run_identification(const ScenarioConfig& config) {
  config.validate();
  return identify(config);
}

RunReport run_scenario(const ScenarioConfig& config) {
  config.validate();
  const ScenarioConfig& c = config;
  RunReport rep;
  rep.config = c;
  rep.metric_start_s = c.metric_start_s;
  rep.metric_end_s = c.metric_end();

  // Calibrate the source so the ANC-off eardrum level matches the target.
  Signal x = make_source(c);
  {
    const PassResult probe = simulate(c, x, false, nullptr);
    const double level = window_spl(probe.eardrum, rep.metric_start_s, rep.metric_end_s, c.band);
    if (is_silent(level)) throw ConfigError("source: silent within the metric window");
    rep.source_gain = std::pow(10.0, (c.target_spl_db - level) / 20.0);
    for (double& v : x.samples) v *= rep.source_gain;
  }

  std::optional<IdentificationReport> id;
  if (c.anc_enabled && c.secondary_path == SecondaryPathMode::identified) {
    id = identify(c);
    rep.id_misalignment_db = id->misalignment_db;
  }

  PassResult off = simulate(c, x, false, nullptr);
  PassResult on = simulate(c, x, c.anc_enabled, id ? &id->estimate : nullptr);

  rep.source = x;
  rep.eardrum_off = std::move(off.eardrum);
  rep.membrane_off = std::move(off.membrane);
  rep.eardrum_on = std::move(on.eardrum);
  rep.membrane_on = std::move(on.membrane);
  rep.guard = on.guard;
  rep.beam = on.beam;
  rep.tracker_log = std::move(on.log);
  rep.frames = std::move(on.frames);
  rep.coefficients = std::move(on.coefficients);

  const double t0 = rep.metric_start_s, t1 = rep.metric_end_s;
  rep.spl_off_db = window_spl(rep.eardrum_off, t0, t1, c.band);
  rep.spl_on_db = window_spl(rep.eardrum_on, t0, t1, c.band);
  rep.attenuation_db = attenuation(rep.spl_off_db, rep.spl_on_db);
  rep.membrane_spl_off_db = window_spl(rep.membrane_off, t0, t1, c.band);
  rep.membrane_spl_on_db = window_spl(rep.membrane_on, t0, t1, c.band);
  rep.membrane_attenuation_db = attenuation(rep.membrane_spl_off_db, rep.membrane_spl_on_db);

  rep.spectrum_off = averaged_spectrum(rep.eardrum_off.slice(t0, t1), c.spectrum_segment_s, c.band);
  rep.spectrum_on = averaged_spectrum(rep.eardrum_on.slice(t0, t1), c.spectrum_segment_s, c.band);
  rep.membrane_spectrum_off =
      averaged_spectrum(rep.membrane_off.slice(t0, t1), c.spectrum_segment_s, c.band);
  rep.membrane_spectrum_on =
      averaged_spectrum(rep.membrane_on.slice(t0, t1), c.spectrum_segment_s, c.band);
  rep.eardrum_bands = band_metrics(rep.spectrum_off, rep.spectrum_on, c.band);
  rep.membrane_bands = band_metrics(rep.membrane_spectrum_off, rep.membrane_spectrum_on, c.band);

  auto fail = [&](const std::string& what) { rep.failures.push_back(what); };
  if (c.expect_min_attenuation_db && !(rep.attenuation_db >= *c.expect_min_attenuation_db))
    fail("overall attenuation " + format_number(rep.attenuation_db) + " dB below " +
         format_number(*c.expect_min_attenuation_db));
  auto check_bands = [&](const std::vector<BandMetric>& bands, std::optional<double> min,
                         const char* where) {
    if (!min) return;
    for (const BandMetric& b : bands)
      if (!(b.attenuation_db >= *min))
        fail(std::string(where) + " band " + format_number(b.band.lo) + "-" +
             format_number(b.band.hi) + " Hz attenuation " + format_number(b.attenuation_db) +
             " dB below " + format_number(*min));
  };
  check_bands(rep.eardrum_bands, c.expect_min_band_attenuation_eardrum_db, "eardrum");
  check_bands(rep.membrane_bands, c.expect_min_band_attenuation_membrane_db, "membrane");
  if (c.anc_enabled && rep.guard.tripped != c.expect_guard_trip)
    fail(rep.guard.tripped ? "divergence guard tripped unexpectedly"
                           : "divergence guard did not trip");
  if (c.expect_beam_on_membrane && rep.beam.frames_on_membrane != rep.beam.frames)
    fail("beam left the membrane on " +
         std::to_string(rep.beam.frames - rep.beam.frames_on_membrane) + " frames");
  if (c.expect_anc_worse && !(rep.spl_on_db >= rep.spl_off_db))
    fail("ANC-on level below ANC-off level");
  return rep;
}

std::vector<std::pair<std::string, double>> RunReport::metrics() const {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto min_att = [](const std::vector<BandMetric>& bands) {
    double v = std::numeric_limits<double>::infinity();
    for (const BandMetric& b : bands) v = std::min(v, b.attenuation_db);
    return v;
  };
  return {
      {"seed", static_cast<double>(config.seed)},
      {"sample_rate_hz", static_cast<double>(config.sample_rate)},
      {"metric_start_s", metric_start_s},
      {"metric_end_s", metric_end_s},
      {"spl_off_db", spl_off_db},
      {"spl_on_db", spl_on_db},
      {"attenuation_db", attenuation_db},
      {"membrane_spl_off_db", membrane_spl_off_db},
      {"membrane_spl_on_db", membrane_spl_on_db},
      {"membrane_attenuation_db", membrane_attenuation_db},
      {"min_band_attenuation_eardrum_db", min_att(eardrum_bands)},
      {"min_band_attenuation_membrane_db", min_att(membrane_bands)},
      {"source_gain", source_gain},
      {"id_misalignment_db", id_misalignment_db.value_or(nan)},
      {"guard_enabled", guard.enabled ? 1.0 : 0.0},
      {"guard_tripped", guard.tripped ? 1.0 : 0.0},
      {"guard_trip_time_s", guard.trip_time_s.value_or(nan)},
      {"guard_baseline_power", guard.baseline_power},
      {"beam_frames", static_cast<double>(beam.frames)},
      {"beam_frames_on_membrane", static_cast<double>(beam.frames_on_membrane)},
      {"beam_max_offset_m", beam.max_offset_m},
      {"beam_first_loss_s", beam.first_loss_s.value_or(nan)},
      {"tracker_lost_frames", static_cast<double>(beam.lost_frames)},
      {"expectation_failures", static_cast<double>(failures.size())},
  };
}

}  // namespace vanc
