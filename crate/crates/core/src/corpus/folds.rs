use super::{Dataset, Split};
use crate::error::{Error, Result};

/// One leave-one-event-out fold.
#[derive(Debug, Clone)]
pub struct Fold {
    pub event: String,
    pub train: Dataset,
    pub test: Dataset,
}

/// One fold per event: train on every other event, test on this one.
pub fn loeo_folds(dataset: &Dataset) -> Result<Vec<Fold>> {
    if let Some(e) = dataset.examples().iter().find(|e| e.event.is_none()) {
        return Err(Error::Protocol(format!("example {:?} has no event tag", e.id)));
    }
    let events = dataset.events();
    if events.len() < 2 {
        return Err(Error::Protocol(format!(
            "leave-one-event-out needs at least 2 events, found {}",
            events.len()
        )));
    }
    Ok(events
        .into_iter()
        .map(|event| {
            let held_out = |e: &super::Example| e.event.as_deref() == Some(event.as_str());
            let train = dataset.filter(Split::Train, |e| !held_out(e));
            let test = dataset.filter(Split::Test, held_out);
            Fold { event, train, test }
        })
        .collect())
}
