//! Regenerates the end-to-end fixture under `tests/fixtures/e2e`.
//!
//! ```text
//! cargo run --release -p panelscope-cli --example gen_fixture [-- <out_dir>]
//! ```
//!
//! Every file is a deterministic function of the constants below, so running
//! the generator twice produces identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{TimeZone, Utc};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use panelscope::audio::{
    accuracy, detect_shouting, train_shout_model, write_wav_mono16, MfccConfig, MfccExtractor, ShoutDataset,
    ShoutTrainParams, Smoothing,
};
use panelscope::ingest::{write_faces, write_metadata, write_rttm, write_transcript, LabelClass, RttmSpan};
use panelscope::model::{FaceObservation, Gender, TranscriptSegment, VideoRecord};
use panelscope::synth::labelled_clip;

const SAMPLE_RATE: u32 = 16_000;
/// Extra samples so that a clip of `n` seconds yields exactly `n` feature blocks.
const TAIL_SAMPLES: usize = 240;
const SEED: u64 = 20_221_019;
const DURATION_S: f64 = 20.0;

struct Utterance {
    start: f64,
    end: f64,
    speaker: &'static str,
    text: &'static str,
}

struct VideoSpec {
    id: &'static str,
    title: &'static str,
    tags: &'static [&'static str],
    published: (i32, u32, u32),
    utterances: &'static [Utterance],
    overlap: &'static [(f64, f64)],
    shout_seconds: (usize, usize),
    diarization: bool,
    faces: &'static [(f64, f64, Gender, f64)],
    ocr: &'static [(f64, &'static str)],
    names: &'static [&'static str],
}

const fn u(start: f64, end: f64, speaker: &'static str, text: &'static str) -> Utterance {
    Utterance { start, end, speaker, text }
}

const VIDEOS: [VideoSpec; 3] = [
    VideoSpec {
        id: "vid_a",
        title: "Border row and the 2019 race",
        tags: &["elections 2019", "india china border news"],
        published: (2020, 1, 15),
        utterances: &[
            u(0.0, 5.0, "S1", "Modi government has delivered on every promise."),
            u(5.0, 10.0, "S2", "This is a stupid lie from you."),
            u(10.0, 15.0, "S1", "Rahul Gandhi never answered the question."),
            u(15.0, 20.0, "S3", "Let us look at the data on the border."),
        ],
        overlap: &[(4.0, 2.0)],
        shout_seconds: (5, 10),
        diarization: true,
        faces: &[
            (0.0, 100.0, Gender::Male, 0.99),
            (3.0, 100.0, Gender::Male, 0.99),
            (6.0, 100.0, Gender::Male, 0.99),
            (9.0, 100.0, Gender::Male, 0.99),
            (12.0, 100.0, Gender::Male, 0.99),
            (15.0, 100.0, Gender::Male, 0.99),
            (18.0, 100.0, Gender::Male, 0.99),
            (0.0, 80.0, Gender::Female, 0.97),
            (3.0, 80.0, Gender::Female, 0.97),
            (6.0, 80.0, Gender::Female, 0.50),
            (9.0, 30.0, Gender::Male, 0.99),
        ],
        ocr: &[(0.0, "LIVE #IndiaFirst debate"), (3.0, "#indiafirst #BorderTruth")],
        names: &["Sambit Patra", "Dr. Sambit Patra", "Gaurav Bhatia", "Pawan Khera", "Arnab Goswami"],
    },
    VideoSpec {
        id: "vid_b",
        title: "Who failed the farmers",
        tags: &["elections 2019"],
        published: (2020, 1, 20),
        utterances: &[
            u(0.0, 5.0, "S1", "Congress has failed the farmers."),
            u(5.0, 10.0, "S2", "Shut up, you idiot."),
            u(10.0, 15.0, "S3", "You are a shameless liar."),
            u(15.0, 20.0, "S1", "Amit Shah spoke about the economy."),
        ],
        overlap: &[(12.0, 2.0)],
        shout_seconds: (10, 20),
        diarization: false,
        faces: &[
            (0.0, 100.0, Gender::Male, 0.95),
            (3.0, 100.0, Gender::Male, 0.95),
            (6.0, 100.0, Gender::Male, 0.95),
            (0.0, 80.0, Gender::Female, 0.95),
            (3.0, 80.0, Gender::Female, 0.95),
            (6.0, 80.0, Gender::Female, 0.95),
            (9.0, 80.0, Gender::Female, 0.95),
            (12.0, 80.0, Gender::Female, 0.95),
            (15.0, 80.0, Gender::Female, 0.95),
            (18.0, 80.0, Gender::Female, 0.95),
        ],
        ocr: &[(1.0, "#FarmersProtest day 40")],
        names: &["sambit patra", "Pawan Khera", "Supriya Shrinate"],
    },
    VideoSpec {
        id: "vid_c",
        title: "Law and order in the capital",
        tags: &["india china border news"],
        published: (2020, 2, 10),
        utterances: &[
            u(0.0, 8.0, "S1", "Yogi Adityanath has improved law and order."),
            u(8.0, 12.0, "S2", "That is a disgusting claim."),
            u(12.0, 20.0, "S3", "Kejriwal did not attend the meeting."),
        ],
        overlap: &[(7.0, 2.0)],
        shout_seconds: (12, 16),
        diarization: false,
        faces: &[],
        ocr: &[],
        names: &["Sambit Patra", "Gaurav Bhatia", "Pawan Khera"],
    },
];

const LEXICON: &str = "term,attribute,weight
stupid,insult,0.6
idiot,insult,0.7
shut up,toxicity,0.4
shameless liar,insult,0.55
disgusting,toxicity,0.3
disgusting,insult,0.3
liar,toxicity,0.2
";

const ROSTER: &str = "canonical_name,occupation,affiliation
sambit patra,Spokesperson,BJP
gaurav bhatia,Spokesperson,BJP
pawan khera,Spokesperson,Congress
supriya shrinate,Spokesperson,Congress
arnab goswami,Journalist,Republic TV
";

const CONFIG: &str = r#"{
  "corpus": "corpus",
  "output": "store",
  "jobs": 2,
  "seed": 7,
  "admission": { "min_duration_s": 10, "max_duration_s": 14400 },
  "entity": { "roster": "roster.csv" },
  "toxicity": { "threshold": 0.5, "lexicon": "lexicon.csv" },
  "audio": { "shout_model": "shout_model.bin" },
  "bias": { "min_freq": 1, "ig_steps": 32 },
  "network": { "triads": { "min_freq": 2 } }
}
"#;

fn pattern(n: usize, (start, end): (usize, usize)) -> Vec<bool> {
    (0..n).map(|i| i >= start && i < end).collect()
}

fn write(path: &Path, contents: &str) {
    fs::write(path, contents).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
}

/// Forty 10-second training clips with a shouting run of random position
/// and length, written as WAV files plus `labels.csv`.
fn training_set(dir: &Path, rng: &mut ChaCha8Rng) {
    use rand::Rng;
    let mut labels = String::from("file,labels\n");
    for i in 0..40 {
        let len = rng.gen_range(3..=7);
        let start = rng.gen_range(0..=10 - len);
        let p = pattern(10, (start, start + len));
        let clip = labelled_clip(&p, SAMPLE_RATE, TAIL_SAMPLES, rng);
        let name = format!("clip_{i:02}.wav");
        write_wav_mono16(&dir.join(&name), &clip, SAMPLE_RATE).expect("write training clip");
        let bits: String = p.iter().map(|&b| if b { '1' } else { '0' }).collect();
        labels.push_str(&format!("{name},{bits}\n"));
    }
    write(&dir.join("labels.csv"), &labels);
}

fn main() {
    let out: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/e2e"));
    let corpus = out.join("corpus");
    fs::create_dir_all(&corpus).expect("create fixture directory");
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    let train_dir = tempfile::tempdir().expect("temporary training directory");
    training_set(train_dir.path(), &mut rng);
    let extractor = MfccExtractor::new(MfccConfig::default()).expect("default MFCC settings");
    let dataset = ShoutDataset::load(train_dir.path(), &extractor).expect("load training clips");
    let (train, test) = dataset.split(0.2, SEED);
    let (blocks, labels) = train.flatten();
    let model = train_shout_model(&blocks, &labels, &ShoutTrainParams::default(), SEED).expect("train shout model");
    let (tb, tl) = test.flatten();
    println!("held-out shout accuracy: {}", accuracy(&model, &tb, &tl).expect("evaluate"));
    model.save(&out.join("shout_model.bin")).expect("save shout model");

    write(&out.join("lexicon.csv"), LEXICON);
    write(&out.join("roster.csv"), ROSTER);
    write(&out.join("config.json"), CONFIG);

    let smoothing = Smoothing::default();
    for v in &VIDEOS {
        let dir = corpus.join(v.id);
        fs::create_dir_all(&dir).expect("create video directory");
        let (y, m, d) = v.published;
        let record = VideoRecord {
            video_id: v.id.into(),
            title: v.title.into(),
            description: String::new(),
            tags: v.tags.iter().map(|t| t.to_string()).collect(),
            duration_s: DURATION_S,
            published_at: Utc.with_ymd_and_hms(y, m, d, 18, 0, 0).unwrap(),
            major_category: None,
            minor_categories: Default::default(),
        };
        write(&dir.join("metadata.json"), &(write_metadata(&record) + "\n"));

        let segments: Vec<TranscriptSegment> = v
            .utterances
            .iter()
            .map(|x| TranscriptSegment {
                video_id: v.id.into(),
                start_s: x.start,
                end_s: x.end,
                speaker: x.speaker.into(),
                text: x.text.into(),
                overlapped: false,
            })
            .collect();
        write(&dir.join("transcript.jsonl"), &write_transcript(&segments));
        let overlap: Vec<RttmSpan> = v
            .overlap
            .iter()
            .map(|&(start_s, dur_s)| RttmSpan {
                video_id: v.id.into(),
                start_s,
                dur_s,
                label: "overlap".into(),
            })
            .collect();
        write(&dir.join("overlap.rttm"), &write_rttm(&overlap, LabelClass::Overlap));
        if v.diarization {
            let turns: Vec<RttmSpan> = v
                .utterances
                .iter()
                .map(|x| RttmSpan {
                    video_id: v.id.into(),
                    start_s: x.start,
                    dur_s: x.end - x.start,
                    label: x.speaker.into(),
                })
                .collect();
            write(&dir.join("diarization.rttm"), &write_rttm(&turns, LabelClass::Speaker));
        }
        if !v.faces.is_empty() {
            let faces: Vec<FaceObservation> = v
                .faces
                .iter()
                .map(|&(t_s, side, gender, confidence)| FaceObservation {
                    video_id: v.id.into(),
                    t_s,
                    x: 10.0,
                    y: 20.0,
                    w: side,
                    h: side,
                    gender,
                    confidence,
                })
                .collect();
            write(&dir.join("faces.csv"), &write_faces(&faces));
        }
        if !v.ocr.is_empty() {
            let lines: String = v
                .ocr
                .iter()
                .map(|(t, text)| serde_json::json!({"video_id": v.id, "t_s": t, "text": text}).to_string() + "\n")
                .collect();
            write(&dir.join("ocr.jsonl"), &lines);
        }
        let names = serde_json::json!({"video_id": v.id, "candidates": v.names}).to_string() + "\n";
        write(&dir.join("names.jsonl"), &names);

        let n_seconds = DURATION_S as usize;
        let shout = pattern(n_seconds, v.shout_seconds);
        let audio = labelled_clip(&shout, SAMPLE_RATE, TAIL_SAMPLES, &mut rng);
        let wav = dir.join("audio.wav");
        write_wav_mono16(&wav, &audio, SAMPLE_RATE).expect("write fixture audio");

        let samples = panelscope::audio::load_wav(&wav, SAMPLE_RATE).expect("reload fixture audio");
        let detection = detect_shouting(&samples, &extractor, &model, &smoothing).expect("detect shouting");
        let expected = vec![(v.shout_seconds.0 as f64, v.shout_seconds.1 as f64)];
        assert_eq!(detection.segments, expected, "{}: detector disagrees with the designed shouting span", v.id);
    }
    println!("fixture written to {}", out.display());
}
