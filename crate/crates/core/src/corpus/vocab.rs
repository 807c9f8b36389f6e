//! Department vocabulary pools. Terms are unique across departments so that
//! topical structure is recoverable from the generated text.

use super::Department;

pub struct Theme {
    pub name: &'static str,
    pub terms: &'static [&'static str],
}

pub fn themes(dept: Department) -> &'static [Theme] {
    match dept {
        Department::ProductDesign => &[
            Theme {
                name: "companion persona",
                terms: &["persona", "personality", "avatar", "voice", "tone", "character", "expressiveness", "empathy"],
            },
            Theme {
                name: "interaction design",
                terms: &["wireframe", "prototype", "onboarding", "navigation", "mockup", "flow", "usability", "figma"],
            },
            Theme {
                name: "feature roadmap",
                terms: &["roadmap", "feature", "milestone", "backlog", "requirement", "specification", "priority", "release"],
            },
            Theme {
                name: "visual identity",
                terms: &["typography", "palette", "iconography", "illustration", "styleguide", "layout", "animation", "gradient"],
            },
        ],
        Department::Marketing => &[
            Theme {
                name: "marketing campaigns",
                terms: &["marketing", "campaign", "launch", "audience", "conversion", "promotion", "influencer", "budget"],
            },
            Theme {
                name: "social media",
                terms: &["social", "tiktok", "instagram", "engagement", "followers", "hashtag", "post", "viral"],
            },
            Theme {
                name: "brand messaging",
                terms: &["brand", "messaging", "slogan", "positioning", "tagline", "storytelling", "press", "announcement"],
            },
            Theme {
                name: "pricing",
                terms: &["pricing", "subscription", "tier", "discount", "trial", "revenue", "churn", "upsell"],
            },
        ],
        Department::SoftwareDev => &[
            Theme {
                name: "backend services",
                terms: &["api", "database", "latency", "endpoint", "server", "cache", "index", "schema"],
            },
            Theme {
                name: "model training",
                terms: &["model", "inference", "finetuning", "dataset", "embedding", "evaluation", "checkpoint", "gpu"],
            },
            Theme {
                name: "devops",
                terms: &["deployment", "pipeline", "kubernetes", "container", "monitoring", "incident", "rollback", "outage"],
            },
            Theme {
                name: "mobile apps",
                terms: &["ios", "android", "app", "crash", "sdk", "build", "testflight", "notification"],
            },
        ],
        Department::UserResearch => &[
            Theme {
                name: "user feedback",
                terms: &["feedback", "complaint", "rating", "testimonial", "satisfaction", "nps", "survey", "sentiment"],
            },
            Theme {
                name: "interviews",
                terms: &["interview", "participant", "transcript", "insight", "recruitment", "diary", "moderator", "study"],
            },
            Theme {
                name: "usage analytics",
                terms: &["retention", "cohort", "dau", "metric", "dashboard", "usage", "telemetry", "segment"],
            },
            Theme {
                name: "accessibility",
                terms: &["accessibility", "screenreader", "contrast", "caption", "inclusive", "wcag", "elderly", "localization"],
            },
        ],
        Department::Operations => &[
            Theme {
                name: "hiring",
                terms: &["hiring", "candidate", "recruiter", "offer", "headcount", "orientation", "payroll", "benefits"],
            },
            Theme {
                name: "finance",
                terms: &["invoice", "expense", "reimbursement", "forecast", "quarterly", "audit", "procurement", "vendor"],
            },
            Theme {
                name: "facilities",
                terms: &["office", "lease", "desk", "badge", "equipment", "laptop", "relocation", "cafeteria"],
            },
            Theme {
                name: "compliance",
                terms: &["compliance", "privacy", "gdpr", "policy", "legal", "contract", "trademark", "security"],
            },
        ],
    }
}

/// Every term of a department, across its themes.
pub fn department_terms(dept: Department) -> Vec<&'static str> {
    themes(dept).iter().flat_map(|t| t.terms.iter().copied()).collect()
}

pub fn job_titles(dept: Department) -> &'static [&'static str] {
    match dept {
        Department::ProductDesign => &["Product Designer", "UX Designer", "Design Lead", "Product Manager"],
        Department::Marketing => &["Marketing Manager", "Growth Marketer", "Content Strategist", "Brand Lead"],
        Department::SoftwareDev => &["Software Engineer", "ML Engineer", "Site Reliability Engineer", "Mobile Developer"],
        Department::UserResearch => &["UX Researcher", "Data Analyst", "Research Lead", "Accessibility Specialist"],
        Department::Operations => &["Operations Manager", "Recruiter", "Finance Analyst", "Legal Counsel"],
    }
}

pub const FIRST_NAMES: &[&str] = &[
    "Aisha", "Ben", "Carlos", "Dana", "Elena", "Farid", "Grace", "Hiro", "Ines", "Jamal",
    "Kira", "Liam", "Maya", "Noah", "Olga", "Priya", "Quinn", "Rosa", "Sami", "Tara",
    "Umar", "Vera", "Wei", "Ximena", "Yusuf", "Zoe", "Amir", "Bianca", "Chen", "Diego",
    "Emma", "Felix", "Gita", "Hana", "Ivan", "Julia", "Kofi", "Lena", "Mateo", "Nadia",
    "Omar", "Paula", "Rafael", "Sofia", "Tomas", "Uma", "Victor", "Wanda", "Yara", "Zane",
];

pub const LAST_NAMES: &[&str] = &[
    "Patel", "Smith", "Garcia", "Kim", "Nguyen", "Okafor", "Rossi", "Müller", "Silva", "Tanaka",
    "Cohen", "Ivanova", "Haddad", "Larsen", "Mensah", "Novak", "Ortiz", "Park", "Quispe", "Reyes",
    "Schmidt", "Torres", "Ueda", "Volkov", "Walsh", "Xu", "Yilmaz", "Zhang", "Andersen", "Becker",
    "Chopra", "Dubois", "Evans", "Fischer", "Gupta", "Hansen", "Ito", "Jensen", "Khan", "Lopez",
];

pub const BACKGROUNDS: &[&str] = &[
    "previously worked at a consumer social startup",
    "joined from a large enterprise software vendor",
    "has a graduate degree in human-computer interaction",
    "spent several years in management consulting",
    "started as an intern and grew with the company",
    "moved over from a gaming studio",
    "has a background in cognitive psychology",
    "led a small team at a fintech company",
];

/// Sentence templates; `{}` slots are filled with vocabulary terms. Filler is
/// kept light so the terms dominate each item.
pub const SENTENCES: &[&str] = &[
    "We need the {} and {} before the {} review.",
    "Numbers on {}, {} and {} look good.",
    "Can we align on {} and {}?",
    "Notes cover {}, {}, and {}.",
    "Is {} blocking {} or {}?",
    "Thoughts on the {} and {} draft?",
    "Risk flagged around {} and {}.",
    "Revisit {} after the {} and {} update.",
    "Goal is better {} and {} without hurting {}.",
    "Thanks for the {} and {} items.",
];

pub const FILE_TYPES: &[&str] = &["deck", "brief", "report", "notes", "spreadsheet", "memo"];
