use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Winner {
    Npc,
    Monster,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FightOutcome {
    pub winner: Winner,
    /// NPC health after the fight; 0 when the NPC lost.
    pub npc_hp: u32,
}

/// Fight to the death: each round a fair coin takes one hp from one side.
pub fn resolve_fight<R: Rng + ?Sized>(npc_hp: u32, monster_hp: u32, rng: &mut R) -> FightOutcome {
    assert!(npc_hp >= 1 && monster_hp >= 1, "both fighters need at least 1 hp");
    let (mut npc, mut monster) = (npc_hp, monster_hp);
    while npc > 0 && monster > 0 {
        if rng.gen_bool(0.5) {
            monster -= 1;
        } else {
            npc -= 1;
        }
    }
    FightOutcome {
        winner: if npc > 0 { Winner::Npc } else { Winner::Monster },
        npc_hp: npc,
    }
}
