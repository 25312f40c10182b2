app.alert("Welcome. Fill in the highlighted fields and press Submit.");
