//! Gender representation metrics from face observations.

use std::collections::{BTreeMap, HashMap};

use chrono::{DateTime, Datelike, Utc};
use serde::{Deserialize, Serialize};

use crate::model::{FaceObservation, Gender};

/// Drops spurious detections: low confidence or tiny boxes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FaceFilter {
    pub min_confidence: f64,
    pub min_area_px: f64,
}

impl Default for FaceFilter {
    fn default() -> Self {
        Self {
            min_confidence: 0.90,
            min_area_px: 1600.0,
        }
    }
}

impl FaceFilter {
    pub fn keeps(&self, face: &FaceObservation) -> bool {
        face.confidence >= self.min_confidence && face.area() >= self.min_area_px
    }
}

pub fn filter_faces(observations: &[FaceObservation], filter: &FaceFilter) -> Vec<FaceObservation> {
    observations.iter().filter(|f| filter.keeps(f)).cloned().collect()
}

/// Face-seconds per gender.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ScreenTime {
    pub male_face_seconds: f64,
    pub female_face_seconds: f64,
}

impl ScreenTime {
    /// Female share of all face-seconds; `None` when no faces were seen.
    pub fn female_share(&self) -> Option<f64> {
        let total = self.male_face_seconds + self.female_face_seconds;
        (total > 0.0).then(|| self.female_face_seconds / total)
    }

    pub fn merge(self, other: Self) -> Self {
        Self {
            male_face_seconds: self.male_face_seconds + other.male_face_seconds,
            female_face_seconds: self.female_face_seconds + other.female_face_seconds,
        }
    }
}

/// Each observation stands for `frame_interval_s` seconds of its gender.
pub fn screen_time(observations: &[FaceObservation], frame_interval_s: f64) -> ScreenTime {
    let (male, female) = gender_counts(observations);
    ScreenTime {
        male_face_seconds: male as f64 * frame_interval_s,
        female_face_seconds: female as f64 * frame_interval_s,
    }
}

fn gender_counts(observations: &[FaceObservation]) -> (usize, usize) {
    let female = observations.iter().filter(|f| f.gender == Gender::Female).count();
    (observations.len() - female, female)
}

/// Mean face area per gender, in square pixels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FaceAreaStats {
    pub male_count: usize,
    pub female_count: usize,
    pub male_mean_area: Option<f64>,
    pub female_mean_area: Option<f64>,
}

fn sorted_mean(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    Some(values.into_iter().sum::<f64>() / n)
}

pub fn face_area_stats(observations: &[FaceObservation]) -> FaceAreaStats {
    let areas = |g: Gender| -> Vec<f64> {
        observations
            .iter()
            .filter(|f| f.gender == g)
            .map(FaceObservation::area)
            .collect()
    };
    let male = areas(Gender::Male);
    let female = areas(Gender::Female);
    FaceAreaStats {
        male_count: male.len(),
        female_count: female.len(),
        male_mean_area: sorted_mean(male),
        female_mean_area: sorted_mean(female),
    }
}

/// Number of frames sampled from a video at the given interval.
pub fn sampled_frames(duration_s: f64, frame_interval_s: f64) -> u64 {
    if duration_s <= 0.0 || frame_interval_s <= 0.0 {
        0
    } else {
        (duration_s / frame_interval_s).ceil() as u64
    }
}

/// What the monthly series needs to know about each video.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoFrames {
    pub video_id: String,
    pub published_at: DateTime<Utc>,
    pub sampled_frames: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MonthlyGender {
    pub frames: u64,
    pub male_faces: u64,
    pub female_faces: u64,
    pub male_per_frame: f64,
    pub female_per_frame: f64,
}

/// Per `YYYY-MM`: gendered face counts pooled over the month's videos divided by
/// the month's total sampled frames. Months without sampled frames are omitted.
pub fn monthly_gender_series(observations: &[FaceObservation], videos: &[VideoFrames]) -> BTreeMap<String, MonthlyGender> {
    let mut month_of: HashMap<&str, String> = HashMap::new();
    let mut out: BTreeMap<String, MonthlyGender> = BTreeMap::new();
    for v in videos {
        let month = format!("{:04}-{:02}", v.published_at.year(), v.published_at.month());
        out.entry(month.clone()).or_default().frames += v.sampled_frames;
        month_of.insert(v.video_id.as_str(), month);
    }
    for f in observations {
        let Some(month) = month_of.get(f.video_id.as_str()) else {
            continue;
        };
        let entry = out.get_mut(month).expect("month registered");
        match f.gender {
            Gender::Male => entry.male_faces += 1,
            Gender::Female => entry.female_faces += 1,
        }
    }
    out.retain(|_, m| m.frames > 0);
    for m in out.values_mut() {
        m.male_per_frame = m.male_faces as f64 / m.frames as f64;
        m.female_per_frame = m.female_faces as f64 / m.frames as f64;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn face(video: &str, gender: Gender, conf: f64, w: f64, h: f64) -> FaceObservation {
        FaceObservation {
            video_id: video.into(),
            t_s: 0.0,
            x: 0.0,
            y: 0.0,
            w,
            h,
            gender,
            confidence: conf,
        }
    }

    #[test]
    fn filtering() {
        let filter = FaceFilter::default();
        assert!(filter.keeps(&face("v", Gender::Male, 0.95, 80.0, 90.0)));
        assert!(!filter.keeps(&face("v", Gender::Male, 0.5, 80.0, 90.0)));
        assert!(!filter.keeps(&face("v", Gender::Male, 0.95, 30.0, 30.0)));
        assert!(filter.keeps(&face("v", Gender::Male, 0.9, 40.0, 40.0)));
    }

    #[test]
    fn screen_time_counts() {
        let mut obs = vec![face("v", Gender::Male, 1.0, 50.0, 50.0); 3];
        obs.push(face("v", Gender::Female, 1.0, 50.0, 50.0));
        let st = screen_time(&obs, 3.0);
        assert_eq!((st.male_face_seconds, st.female_face_seconds), (9.0, 3.0));
        assert_eq!(st.female_share(), Some(0.25));
        assert_eq!(screen_time(&[], 3.0).female_share(), None);
    }

    #[test]
    fn area_means() {
        let s = face_area_stats(&[face("v", Gender::Male, 1.0, 80.0, 90.0)]);
        assert_eq!(s.male_mean_area, Some(7200.0));
        assert_eq!(s.female_mean_area, None);
        let s = face_area_stats(&[face("v", Gender::Female, 1.0, 10.0, 10.0), face("v", Gender::Female, 1.0, 10.0, 30.0)]);
        assert_eq!(s.female_mean_area, Some(200.0));
    }

    #[test]
    fn monthly_pooling() {
        let jan = Utc.with_ymd_and_hms(2021, 1, 5, 0, 0, 0).unwrap();
        let videos = vec![
            VideoFrames {
                video_id: "a".into(),
                published_at: jan,
                sampled_frames: 10,
            },
            VideoFrames {
                video_id: "b".into(),
                published_at: jan,
                sampled_frames: 10,
            },
        ];
        let mut obs = vec![face("a", Gender::Male, 1.0, 50.0, 50.0); 10];
        obs.extend(vec![face("b", Gender::Male, 1.0, 50.0, 50.0); 30]);
        let series = monthly_gender_series(&obs, &videos);
        assert_eq!(series.len(), 1);
        assert_eq!(series["2021-01"].male_per_frame, 2.0);
        assert_eq!(series["2021-01"].female_per_frame, 0.0);

        let single = monthly_gender_series(&vec![face("a", Gender::Male, 1.0, 50.0, 50.0); 20], &videos[..1]);
        assert_eq!(single["2021-01"].male_per_frame, 2.0);
    }

    #[test]
    fn frame_sampling() {
        assert_eq!(sampled_frames(30.0, 3.0), 10);
        assert_eq!(sampled_frames(31.0, 3.0), 11);
        assert_eq!(sampled_frames(0.0, 3.0), 0);
    }
}
