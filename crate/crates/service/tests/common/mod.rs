#![allow(dead_code)]

use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use pbench_core::ExperimentSpec;
use pbench_service::{Clock, Collection};

pub fn bubble_spec() -> ExperimentSpec {
    let stimuli: Vec<String> = (0..6)
        .map(|i| {
            format!(
                r#"{{"name":"img{i}","uri":"/stimuli/img{i}.png","widthPx":600,"heightPx":400}}"#
            )
        })
        .collect();
    let rows: String = (0..6).map(|i| format!("img{i}\\n")).collect();
    let text = format!(
        r#"{{"id":"bubble-demo","paradigm":"bubble","seed":42,"stimuli":[{}],"trialTableCsv":"imageName\n{rows}"}}"#,
        stimuli.join(",")
    );
    ExperimentSpec::parse(&text, Path::new("bubble.json")).unwrap()
}

pub fn composition_spec() -> ExperimentSpec {
    let text = r#"{"id":"comp","paradigm":"composition","seed":3,
        "stimuli":[{"name":"tree","uri":"/stimuli/tree.png","widthPx":600,"heightPx":400}],
        "trialTableCsv":"imageName\ntree\n"}"#;
    ExperimentSpec::parse(text, Path::new("comp.json")).unwrap()
}

pub struct ManualClock(pub Arc<AtomicU64>);

impl ManualClock {
    pub fn new(start: u64) -> (Self, Clock) {
        let t = Arc::new(AtomicU64::new(start));
        let handle = t.clone();
        (Self(t), Arc::new(move || handle.load(Ordering::SeqCst)))
    }

    pub fn advance(&self, ms: u64) {
        self.0.fetch_add(ms, Ordering::SeqCst);
    }
}

pub fn collection(dir: &Path, clock: Clock) -> Collection {
    Collection::new(vec![bubble_spec(), composition_spec()], dir, clock).unwrap()
}

pub fn bubble_csv(session: &str) -> String {
    format!("session,trial,imageName,clickIndex,x,y,tMs\n{session},0,img0,0,10.5,20,130\n{session},0,img0,1,300,200,900\n")
}
