var x = 1;
triggerPayload(x);
