//! Extended treemap: squarified topic cells whose area follows item counts,
//! with every item given a unique grid slot inside its cell. Slots are handed
//! out subtopic by subtopic so each subtopic occupies one contiguous run.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::ItemId;
use crate::error::{CoreError, Result};
use crate::subtopics::SubtopicId;

/// Fraction of each canvas axis taken by an expanded cell.
pub const EXPAND_FRACTION: f64 = 0.8;
/// Mark radius as a fraction of the slot pitch.
pub const RADIUS_FACTOR: f64 = 0.35;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub const UNIT: Rect = Rect {
        x: 0.0,
        y: 0.0,
        w: 1.0,
        h: 1.0,
    };

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn contains_strictly(&self, p: [f64; 2]) -> bool {
        p[0] > self.x && p[0] < self.x + self.w && p[1] > self.y && p[1] < self.y + self.h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellRect {
    pub topic_id: usize,
    #[serde(flatten)]
    pub rect: Rect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemPlacement {
    pub item_id: ItemId,
    pub topic_id: usize,
    pub subtopic_id: SubtopicId,
    pub slot_index: usize,
    /// `(row, col)` within the cell grid.
    pub slot: (usize, usize),
    pub position: [f64; 2],
    pub radius: f64,
}

/// Slot run `[first_slot, first_slot + len)` of one subtopic inside its cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubtopicSpan {
    pub subtopic_id: SubtopicId,
    pub topic_id: usize,
    pub first_slot: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutModel {
    pub cells: Vec<CellRect>,
    pub placements: Vec<ItemPlacement>,
    pub spans: Vec<SubtopicSpan>,
    pub expanded_topic: Option<usize>,
}

/// Ratio of the worst (most elongated) rectangle when `row` is laid along a
/// side of length `side`.
fn worst_ratio(row: &[f64], side: f64) -> f64 {
    let sum: f64 = row.iter().sum();
    let thickness = sum / side;
    row.iter()
        .map(|&a| {
            let length = a / thickness;
            (length / thickness).max(thickness / length)
        })
        .fold(0.0, f64::max)
}

/// Squarified treemap in input order. A row is laid along the shorter side
/// and grows while doing so does not worsen its worst aspect ratio.
pub fn squarify(weights: &[f64], rect: Rect) -> Result<Vec<Rect>> {
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
        return Err(CoreError::input(format!("treemap weights must be positive, got {w}")));
    }
    if !(rect.w > 0.0 && rect.h > 0.0) {
        return Err(CoreError::input("treemap rectangle must have positive size"));
    }
    let total: f64 = weights.iter().sum();
    let scale = rect.area() / total;
    let areas: Vec<f64> = weights.iter().map(|w| w * scale).collect();

    let mut out = Vec::with_capacity(areas.len());
    let mut free = rect;
    let mut start = 0;
    while start < areas.len() {
        if start == areas.len() - 1 {
            out.push(free);
            break;
        }
        let side = free.w.min(free.h);
        let mut end = start + 1;
        while end < areas.len() && worst_ratio(&areas[start..end], side) >= worst_ratio(&areas[start..=end], side) {
            end += 1;
        }
        let row = &areas[start..end];
        let row_sum: f64 = row.iter().sum();
        let last_row = end == areas.len();
        if free.w >= free.h {
            // vertical strip on the left
            let width = if last_row { free.w } else { row_sum / free.h };
            let mut y = free.y;
            for (i, &a) in row.iter().enumerate() {
                let h = if i + 1 == row.len() { free.y + free.h - y } else { a / width };
                out.push(Rect { x: free.x, y, w: width, h });
                y += h;
            }
            free = Rect {
                x: free.x + width,
                y: free.y,
                w: free.w - width,
                h: free.h,
            };
        } else {
            // horizontal strip on top
            let height = if last_row { free.h } else { row_sum / free.w };
            let mut x = free.x;
            for (i, &a) in row.iter().enumerate() {
                let w = if i + 1 == row.len() { free.x + free.w - x } else { a / height };
                out.push(Rect { x, y: free.y, w, h: height });
                x += w;
            }
            free = Rect {
                x: free.x,
                y: free.y + height,
                w: free.w,
                h: free.h - height,
            };
        }
        start = end;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    pub row: usize,
    pub col: usize,
    pub position: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub rows: usize,
    pub cols: usize,
    /// Distance between neighbouring slot centres along the tighter axis.
    pub pitch: f64,
    /// Row-major slot centres.
    pub slots: Vec<Slot>,
}

/// `cols = ⌈√(n·w/h)⌉` clamped to `[1, n]`, `rows = ⌈n/cols⌉`, centres inset by
/// half a step from the cell edges.
pub fn grid_slots(cell: Rect, n: usize) -> Result<Grid> {
    if !(cell.w > 0.0 && cell.h > 0.0) {
        return Err(CoreError::input("grid cell must have positive width and height"));
    }
    if n == 0 {
        return Err(CoreError::input("grid needs at least one slot"));
    }
    let cols = ((n as f64 * cell.w / cell.h).sqrt().ceil() as usize).clamp(1, n);
    let rows = n.div_ceil(cols);
    let step_x = cell.w / cols as f64;
    let step_y = cell.h / rows as f64;
    let mut slots = Vec::with_capacity(rows * cols);
    for row in 0..rows {
        for col in 0..cols {
            slots.push(Slot {
                row,
                col,
                position: [
                    cell.x + (col as f64 + 0.5) * step_x,
                    cell.y + (row as f64 + 0.5) * step_y,
                ],
            });
        }
    }
    Ok(Grid {
        rows,
        cols,
        pitch: step_x.min(step_y),
        slots,
    })
}

/// An item awaiting placement: its subtopic and projected coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutItem {
    pub item_id: ItemId,
    pub subtopic_id: SubtopicId,
    pub coord: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicLayoutInput {
    pub topic_id: usize,
    pub items: Vec<LayoutItem>,
}

/// Orders subtopics by the angle of their projected centroid (ties by id) and
/// items within a subtopic by `(y, x, id)`, then fills slots row-major.
pub fn assign_slots(topic_id: usize, items: &[LayoutItem], grid: &Grid) -> Result<(Vec<ItemPlacement>, Vec<SubtopicSpan>)> {
    if items.len() > grid.slots.len() {
        return Err(CoreError::Integrity(format!(
            "{} items exceed {} grid slots",
            items.len(),
            grid.slots.len()
        )));
    }
    let mut groups: BTreeMap<&SubtopicId, Vec<&LayoutItem>> = BTreeMap::new();
    for it in items {
        groups.entry(&it.subtopic_id).or_default().push(it);
    }
    let mut ordered: Vec<(f64, &SubtopicId, Vec<&LayoutItem>)> = groups
        .into_iter()
        .map(|(sid, mut members)| {
            let n = members.len() as f64;
            let cx = members.iter().map(|m| m.coord[0]).sum::<f64>() / n;
            let cy = members.iter().map(|m| m.coord[1]).sum::<f64>() / n;
            members.sort_by(|a, b| {
                a.coord[1]
                    .total_cmp(&b.coord[1])
                    .then(a.coord[0].total_cmp(&b.coord[0]))
                    .then_with(|| a.item_id.cmp(&b.item_id))
            });
            (cy.atan2(cx), sid, members)
        })
        .collect();
    ordered.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));

    let radius = RADIUS_FACTOR * grid.pitch;
    let mut placements = Vec::with_capacity(items.len());
    let mut spans = Vec::with_capacity(ordered.len());
    let mut next = 0;
    for (_, sid, members) in ordered {
        spans.push(SubtopicSpan {
            subtopic_id: sid.clone(),
            topic_id,
            first_slot: next,
            len: members.len(),
        });
        for m in members {
            let slot = &grid.slots[next];
            placements.push(ItemPlacement {
                item_id: m.item_id.clone(),
                topic_id,
                subtopic_id: sid.clone(),
                slot_index: next,
                slot: (slot.row, slot.col),
                position: slot.position,
                radius,
            });
            next += 1;
        }
    }
    Ok((placements, spans))
}

/// Lays out all topics, optionally with one topic expanded.
pub fn compute_layout(topics: &[TopicLayoutInput], expanded: Option<usize>) -> Result<LayoutModel> {
    if topics.is_empty() {
        return Err(CoreError::input("layout needs at least one topic"));
    }
    if let Some(t) = topics.iter().find(|t| t.items.is_empty()) {
        return Err(CoreError::input(format!("topic {} has no items", t.topic_id)));
    }
    let cells = match expanded {
        None => treemap_cells(topics, Rect::UNIT)?,
        Some(id) => {
            let Some(focus) = topics.iter().find(|t| t.topic_id == id) else {
                return Err(CoreError::NotFound(format!("topic {id}")));
            };
            expanded_cells(topics, focus)?
        }
    };

    let mut placements = Vec::new();
    let mut spans = Vec::new();
    for cell in &cells {
        let topic = topics.iter().find(|t| t.topic_id == cell.topic_id).expect("cell per topic");
        let grid = grid_slots(cell.rect, topic.items.len())?;
        let (p, s) = assign_slots(topic.topic_id, &topic.items, &grid)?;
        placements.extend(p);
        spans.extend(s);
    }
    Ok(LayoutModel {
        cells,
        placements,
        spans,
        expanded_topic: expanded,
    })
}

pub fn expand_cell(topics: &[TopicLayoutInput], topic_id: usize) -> Result<LayoutModel> {
    compute_layout(topics, Some(topic_id))
}

/// Topics sorted by descending size (ties by id), squarified into `rect`,
/// returned in topic-id order.
fn treemap_cells(topics: &[TopicLayoutInput], rect: Rect) -> Result<Vec<CellRect>> {
    let mut order: Vec<&TopicLayoutInput> = topics.iter().collect();
    order.sort_by(|a, b| b.items.len().cmp(&a.items.len()).then(a.topic_id.cmp(&b.topic_id)));
    let weights: Vec<f64> = order.iter().map(|t| t.items.len() as f64).collect();
    let rects = squarify(&weights, rect)?;
    let mut cells: Vec<CellRect> = order
        .iter()
        .zip(rects)
        .map(|(t, rect)| CellRect {
            topic_id: t.topic_id,
            rect,
        })
        .collect();
    cells.sort_by_key(|c| c.topic_id);
    Ok(cells)
}

/// The focused cell takes the top-left `0.8 × 0.8` of the canvas; the other
/// topics fill the L-shaped margin as a right strip and a bottom strip, split
/// by item count in proportion to the strips' areas.
fn expanded_cells(topics: &[TopicLayoutInput], focus: &TopicLayoutInput) -> Result<Vec<CellRect>> {
    let f = EXPAND_FRACTION;
    let mut cells = vec![CellRect {
        topic_id: focus.topic_id,
        rect: Rect { x: 0.0, y: 0.0, w: f, h: f },
    }];
    let mut rest: Vec<TopicLayoutInput> = topics.iter().filter(|t| t.topic_id != focus.topic_id).cloned().collect();
    rest.sort_by(|a, b| b.items.len().cmp(&a.items.len()).then(a.topic_id.cmp(&b.topic_id)));

    let right = Rect {
        x: f,
        y: 0.0,
        w: 1.0 - f,
        h: 1.0,
    };
    let bottom = Rect {
        x: 0.0,
        y: f,
        w: f,
        h: 1.0 - f,
    };
    match rest.len() {
        0 => {}
        1 => cells.extend(treemap_cells(&rest, right)?),
        len => {
            let target = right.area() / (right.area() + bottom.area());
            let total: usize = rest.iter().map(|t| t.items.len()).sum();
            let mut best = (1, f64::INFINITY);
            let mut cum = 0;
            for m in 1..len {
                cum += rest[m - 1].items.len();
                let err = (cum as f64 / total as f64 - target).abs();
                if err < best.1 {
                    best = (m, err);
                }
            }
            let (first, second) = rest.split_at(best.0);
            cells.extend(treemap_cells(first, right)?);
            cells.extend(treemap_cells(second, bottom)?);
        }
    }
    cells.sort_by_key(|c| c.topic_id);
    Ok(cells)
}
