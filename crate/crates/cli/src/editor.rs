use rustyline::completion::Completer;
use rustyline::error::ReadlineError;
use rustyline::highlight::Highlighter;
use rustyline::hint::Hinter;
use rustyline::history::DefaultHistory;
use rustyline::validate::Validator;
use rustyline::{Context, Editor, Helper};
use tsdb_core::shell::{complete, Console, PROMPT};
use tsdb_core::storage::Schema;

pub struct SchemaHelper {
    schema: Schema,
}

impl Completer for SchemaHelper {
    type Candidate = String;

    fn complete(&self, line: &str, pos: usize, _ctx: &Context<'_>) -> rustyline::Result<(usize, Vec<String>)> {
        Ok(complete(&self.schema, line, pos))
    }
}

impl Hinter for SchemaHelper {
    type Hint = String;
}

impl Highlighter for SchemaHelper {}

impl Validator for SchemaHelper {}

impl Helper for SchemaHelper {}

/// Line editing with history recall and completion.
pub struct EditorConsole {
    editor: Editor<SchemaHelper, DefaultHistory>,
}

impl EditorConsole {
    pub fn new(schema: Schema, history: &[String]) -> rustyline::Result<EditorConsole> {
        let mut editor = Editor::new()?;
        editor.set_helper(Some(SchemaHelper { schema }));
        for line in history {
            editor.add_history_entry(line.as_str())?;
        }
        Ok(EditorConsole { editor })
    }
}

impl Console for EditorConsole {
    fn read_line(&mut self, prompt: &str) -> Option<String> {
        match self.editor.readline(prompt) {
            Ok(line) => Some(line),
            // ^C clears the main prompt but abandons a dialogue
            Err(ReadlineError::Interrupted) if prompt == PROMPT => Some(String::new()),
            Err(_) => None,
        }
    }

    fn print(&mut self, text: &str) {
        print!("{text}");
    }

    fn add_history(&mut self, line: &str) {
        let _ = self.editor.add_history_entry(line);
    }
}
